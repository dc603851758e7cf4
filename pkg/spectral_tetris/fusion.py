"""
Spectral tetris fusion frames.

The reference fusion frame packs the columns of a spectral tetris frame into
as few support-disjoint groups as possible. Any dimension profile it
majorizes is then reached by moving single columns, or swapping whole chains
of overlapping columns, between two groups at a time.
"""

import logging
from dataclasses import dataclass
from typing import FrozenSet, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import networkx as nx

from .construct import ConstructRequest, construct
from .core import FusionPartition, Spectrum, SynthesisMatrix, first_overlap, is_integral, log_state
from .errors import InvariantViolation, MajorizationFailed, PartitionError, SpectrumError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DimensionProfile:
    """Requested subspace dimensions, kept with their nonincreasing rearrangement."""

    requested: Tuple[int, ...]

    def __post_init__(self):
        requested = tuple(self.requested)
        if not requested:
            raise PartitionError("dimension profile is empty")
        for index, d in enumerate(requested):
            if isinstance(d, bool) or not isinstance(d, int) or d < 1:
                raise PartitionError(f"dimension {index} is {d!r}; dimensions must be positive integers")
        positions = tuple(sorted(range(len(requested)), key=lambda i: -requested[i]))
        object.__setattr__(self, "requested", requested)
        object.__setattr__(self, "_positions", positions)

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(self.requested[i] for i in self._positions)

    @property
    def positions(self) -> Tuple[int, ...]:
        """positions[i] is the requested index of the i-th largest dimension."""
        return self._positions

    @property
    def total(self) -> int:
        return sum(self.requested)

    def in_requested_order(self, items: Sequence) -> list:
        ordered = [None] * len(self.requested)
        for rank, position in enumerate(self._positions):
            ordered[position] = items[rank]
        return ordered


@dataclass(frozen=True)
class ChainSet:
    """Columns of two groups linked by overlapping supports, with their row span."""

    members: FrozenSet[int]
    left: int
    right: int

    def split(self, group: Iterable[int]) -> Tuple[FrozenSet[int], FrozenSet[int]]:
        """(members in ``group``, the other members)."""
        inside = self.members & frozenset(group)
        return inside, self.members - inside


class ReferenceFusionFrame(NamedTuple):
    partition: FusionPartition
    dims: Tuple[int, ...]
    frame: SynthesisMatrix


def majorizes(a: Sequence[int], b: Sequence[int]) -> bool:
    """True iff the nonincreasing rearrangement of ``a`` majorizes that of ``b``."""
    length = max(len(a), len(b))
    a = sorted(list(a) + [0] * (length - len(a)), reverse=True)
    b = sorted(list(b) + [0] * (length - len(b)), reverse=True)
    if sum(a) != sum(b):
        return False
    total_a = total_b = 0
    for x, y in zip(a, b):
        total_a, total_b = total_a + x, total_b + y
        if total_a < total_b:
            return False
    return True


def _dominates_in_place(sizes: Sequence[int], dims: Sequence[int]) -> bool:
    """Prefix dominance without sorting (the order the rebalance loop relies on)."""
    total_s = total_d = 0
    for s, d in zip(sizes, dims):
        total_s, total_d = total_s + s, total_d + d
        if total_s < total_d:
            return False
    return total_s == total_d


def integer_reference_dims(lam: Spectrum) -> Tuple[int, ...]:
    """a_n = #{r : lambda_r >= n} for n = 1..max(lambda), integer spectra only."""
    for index, value in enumerate(lam):
        if not is_integral(value, lam.slack):
            raise SpectrumError(f"eigenvalue {index} is {value}; integer reference dims need integer eigenvalues")
    values = [int(round(value)) for value in lam]
    return tuple(sum(1 for v in values if v >= level) for level in range(1, max(values) + 1))


def spectral_tetris_frame(lam: Spectrum) -> SynthesisMatrix:
    """Frame behind the fusion constructions; tight spectra use the tight constructors."""
    if lam.is_tight and lam.exact:
        return construct(ConstructRequest(lam.n, lam.m, tight=True))
    return construct(ConstructRequest(lam.n, lam.m, spectrum=lam))


def reference_fusion_frame(lam: Optional[Spectrum] = None, frame: Optional[SynthesisMatrix] = None) -> ReferenceFusionFrame:
    """First-fit packing of the columns of a spectral tetris frame into support-disjoint groups.

    Without ``frame`` the frame is constructed from ``lam`` with automatic
    method selection.
    """
    if frame is None:
        if lam is None:
            raise SpectrumError("reference fusion frame needs a spectrum or a frame")
        frame = spectral_tetris_frame(lam)
    elif lam is not None and (lam.n, lam.m) != (frame.n_rows, frame.n_cols):
        raise SpectrumError(f"spectrum is {lam.n}x{lam.m} but the frame is {frame.n_rows}x{frame.n_cols}")
    label = f"rff {frame.n_rows}x{frame.n_cols}"

    groups: List[List[int]] = []
    reach: List[int] = []
    previous_left = 0
    for col in range(frame.n_cols):
        span = frame.support(col)
        if span is None:
            raise InvariantViolation(f"[{label}] column {col} is zero")
        if span[0] < previous_left:
            raise InvariantViolation(f"[{label}] column {col} starts above column {col - 1}")
        previous_left = span[0]
        for index, right in enumerate(reach):
            if right < span[0]:
                groups[index].append(col)
                reach[index] = span[1]
                break
        else:
            groups.append([col])
            reach.append(span[1])

    t = max(frame.row_support_sizes())
    dims = tuple(len(group) for group in groups)
    if len(groups) != t:
        raise InvariantViolation(f"[{label}] first fit used {len(groups)} groups, rows have support {t}")
    if any(a < b for a, b in zip(dims, dims[1:])):
        raise InvariantViolation(f"[{label}] group sizes {dims} are not nonincreasing")
    log_state(logger, "rff", t=t, dims="|".join(map(str, dims)))
    return ReferenceFusionFrame(FusionPartition(tuple(tuple(g) for g in groups)), dims, frame)


def _overlap_graph(frame: SynthesisMatrix, columns: Iterable[int]) -> nx.Graph:
    graph = nx.Graph()
    spans = sorted((frame.support(col), col) for col in columns)
    graph.add_nodes_from(col for _, col in spans)
    for i, (span_a, col_a) in enumerate(spans):
        for span_b, col_b in spans[i + 1 :]:
            if span_b[0] > span_a[1]:
                break
            graph.add_edge(col_a, col_b)
    return graph


def maximal_chains(group_a: Iterable[int], group_b: Iterable[int], frame: SynthesisMatrix) -> List[ChainSet]:
    """Connected components of the support-overlap graph on the union of two groups, by leftmost row."""
    group_a, group_b = frozenset(group_a), frozenset(group_b)
    graph = _overlap_graph(frame, group_a | group_b)
    chains = []
    for component in nx.connected_components(graph):
        spans = [frame.support(col) for col in component]
        chain = ChainSet(frozenset(component), min(s[0] for s in spans), max(s[1] for s in spans))
        from_a, from_b = chain.split(group_a)
        if abs(len(from_a) - len(from_b)) > 1:
            raise InvariantViolation(
                f"chain {sorted(chain.members)} holds {len(from_a)} columns of one group and {len(from_b)} "
                f"of the other; the groups are not support-disjoint"
            )
        chains.append(chain)
    return sorted(chains, key=lambda chain: (chain.left, min(chain.members)))


@dataclass(frozen=True)
class RebalanceStep:
    """One iteration of the rebalance loop, after it was applied."""

    case: str
    k: int
    m: int
    moved: Tuple[int, ...]
    discrepancy: int
    groups: Tuple[Tuple[int, ...], ...]

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(len(group) for group in self.groups)


def _discrepancy(groups: Sequence[Sequence[int]], dims: Sequence[int]) -> int:
    return sum(abs(len(group) - d) for group, d in zip(groups, dims))


def rebalance_steps(
    frame: SynthesisMatrix, groups: Sequence[Sequence[int]], dims: Sequence[int]
) -> Iterator[RebalanceStep]:
    """Move columns between groups until group sizes equal ``dims``.

    ``dims`` must be nonincreasing and dominated by the group sizes in prefix
    sums. Each step either moves one column whose support misses the
    receiving group, or swaps a chain holding one more column of the giving
    group. Discrepancy, support-disjointness and dominance are checked after
    every step.
    """
    length = max(len(groups), len(dims))
    work = [sorted(group) for group in groups] + [[] for _ in range(length - len(groups))]
    targets = list(dims) + [0] * (length - len(dims))
    if not _dominates_in_place([len(g) for g in work], targets):
        raise MajorizationFailed([len(g) for g in work], dims, certified=False)
    discrepancy = _discrepancy(work, targets)
    budget = discrepancy

    for _ in range(budget + 1):
        if discrepancy == 0:
            return
        m = max(j for j in range(length) if len(work[j]) != targets[j])
        candidates = [j for j in range(m) if len(work[j]) > targets[j]]
        if not candidates:
            raise InvariantViolation(f"no group before {m} is larger than requested (sizes {[len(g) for g in work]})")
        k = candidates[-1]
        receiving = work[m]

        lonely = [w for w in work[k] if all(not frame.supports_overlap(w, u) for u in receiving)]
        if lonely:
            case, moved = "move", (lonely[0],)
            work[k].remove(lonely[0])
            work[m] = sorted(receiving + [lonely[0]])
        else:
            chosen = None
            for chain in maximal_chains(work[k], receiving, frame):
                from_k, from_m = chain.split(work[k])
                if len(from_k) == len(from_m) + 1:
                    chosen = chain
                    break
            if chosen is None:
                raise InvariantViolation(f"no chain between groups {k} and {m} carries an extra column of group {k}")
            case, moved = "swap", tuple(sorted(chosen.members))
            from_k, from_m = chosen.split(work[k])
            work[k] = sorted((set(work[k]) - from_k) | from_m)
            work[m] = sorted((set(receiving) - from_m) | from_k)

        following = _discrepancy(work, targets)
        if following >= discrepancy:
            raise InvariantViolation(f"rebalance step {case} between {k} and {m} left the discrepancy at {following}")
        for index in (k, m):
            clash = first_overlap(frame, work[index])
            if clash is not None:
                raise InvariantViolation(f"group {index} lost support-disjointness at columns {clash}")
        sizes = [len(g) for g in work]
        if not (_dominates_in_place(sizes, targets) and majorizes(sizes, targets)):
            raise InvariantViolation(f"group sizes {sizes} no longer majorize {targets}")
        discrepancy = following
        log_state(
            logger, "rebalance", case=case, k=k, m=m, moved="|".join(map(str, moved)), discrepancy=discrepancy
        )
        yield RebalanceStep(case, k, m, moved, discrepancy, tuple(tuple(g) for g in work))
    raise InvariantViolation(f"rebalance did not finish within {budget} steps")


def build_fusion_frame(
    lam: Spectrum, dims, frame: Optional[SynthesisMatrix] = None
) -> FusionPartition:
    """Spectral tetris fusion frame with subspace dimensions ``dims`` (in the caller's order).

    Raises MajorizationFailed when the reference dimensions do not majorize
    ``dims``; for tight spectra with M >= 2N this proves no such fusion frame
    exists.
    """
    profile = dims if isinstance(dims, DimensionProfile) else DimensionProfile(tuple(dims))
    if profile.total != lam.m:
        raise PartitionError(f"dimensions sum to {profile.total}, but the frame has M={lam.m} vectors")
    reference = reference_fusion_frame(lam, frame)
    label = f"fusion {lam.n}x{lam.m}"
    if not majorizes(reference.dims, profile.dims):
        certified = lam.is_tight and lam.m >= 2 * lam.n
        logger.info(f"[{label}] reference dims {reference.dims} do not majorize {profile.dims}")
        raise MajorizationFailed(reference.dims, profile.requested, certified)

    groups = reference.partition.groups
    steps = 0
    for step in rebalance_steps(reference.frame, groups, profile.dims):
        groups = step.groups
        steps += 1
    logger.info(f"[{label}] reached dims {profile.dims} in {steps} steps")
    if any(groups[len(profile.dims) :]):
        raise InvariantViolation(f"[{label}] columns left in groups beyond the requested {len(profile.dims)}")
    partition = FusionPartition(tuple(profile.in_requested_order(groups[: len(profile.dims)])))
    partition.check_covers(lam.m)
    partition.check_disjoint_supports(reference.frame)
    return partition
