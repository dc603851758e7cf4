#!/usr/bin/env python3
"""Generate the reference frames used as worked examples.

Writes a FrameDocument (.json) and a MatrixMarket file (.mtx) for each frame:
the 4x5 tight frame, the two 3x8 STC frames, the 6x18 integer frame and the
7x10 tight frame (with and without the alternative block order).

Usage:
    python tools/generate_reference_frames.py [out_dir]
"""

import os
import sys
from fractions import Fraction

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from spectral_tetris import Spectrum, reference_fusion_frame, stc, tdftst, tight_block_sequence
from spectral_tetris.documents import FrameDocument, to_matrix_market, write_document

FRAMES_DIR = os.path.join(os.path.dirname(__file__), "..", "resources", "frames")


def reference_frames():
    """(name, frame, spectrum) for every worked example."""
    example = Spectrum((Fraction(5, 2), Fraction(10, 3), Fraction(13, 6)))
    swapped = Spectrum((Fraction(10, 3), Fraction(5, 2), Fraction(13, 6)))
    integer = Spectrum((4, 4, 3, 3, 2, 2))
    return [
        ("tight_4x5", tdftst(4, 5), Spectrum.tight(4, 5)),
        ("stc_3x8", stc(example), example),
        ("stc_3x8_swapped", stc(swapped), swapped),
        ("stc_6x18", stc(integer), integer),
        ("tight_7x10", tdftst(7, 10), Spectrum.tight(7, 10)),
        ("tight_7x10_alternating", tight_block_sequence(7, 10, (2, 3, 2, 3)), Spectrum.tight(7, 10)),
    ]


def write_frame(out_dir, name, frame, lam):
    """Write one frame with its reference fusion frame partition."""
    reference = reference_fusion_frame(lam, frame)
    json_path = os.path.join(out_dir, f"{name}.json")
    write_document(FrameDocument(frame, lam, reference.partition), json_path)
    mtx_path = os.path.join(out_dir, f"{name}.mtx")
    with open(mtx_path, "w") as f:
        f.write(to_matrix_market(frame))
    print(f"  Created {json_path} ({frame.n_rows}x{frame.n_cols}, dims {reference.dims})")
    return json_path, mtx_path


def main(out_dir=None):
    out_dir = out_dir or FRAMES_DIR
    os.makedirs(out_dir, exist_ok=True)
    print(f"Generating reference frames in {out_dir}...")
    written = []
    for name, frame, lam in reference_frames():
        written.extend(write_frame(out_dir, name, frame, lam))
    print("\nDone! All reference frames generated.")
    return written


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
