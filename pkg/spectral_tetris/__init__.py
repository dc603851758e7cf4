"""
Spectral tetris: sparse unit norm frames with a prescribed frame operator
spectrum, and fusion frames with prescribed subspace dimensions.
"""

__version__ = "1.0.0"

from .blocks import (
    Block,
    GeneralBlockSpec,
    TightBlockSpec,
    correction_range,
    dft_matrix,
    make_general_block,
    make_tight_block,
    optimal_block_sizes,
    step_size,
)
from .construct import (
    BlockwiseOrder,
    ConstructRequest,
    Method,
    blockwise_order,
    construct,
    dftst,
    stc,
    tdftst,
    tight_block_sequence,
)
from .core import (
    DEFAULT_TOLERANCE,
    Entry,
    FusionPartition,
    Spectrum,
    SpectrumOrder,
    SynthesisMatrix,
    VerificationReport,
    entry_value,
    gram_diag_residual,
)
from .errors import (
    BlockError,
    ConstructionError,
    DocumentError,
    InvariantViolation,
    MajorizationFailed,
    PartitionError,
    SpectralTetrisError,
    SpectrumError,
)
from .fusion import (
    ChainSet,
    DimensionProfile,
    build_fusion_frame,
    integer_reference_dims,
    majorizes,
    maximal_chains,
    rebalance_steps,
    reference_fusion_frame,
    spectral_tetris_frame,
)
from .verify import SparsityReport, sparsity, verify_frame, verify_fusion
