"""Regenerate the shipped (264, 88) PEG code asset."""

import numpy as np

from rsura.ldpc import to_alist
from rsura.ldpc.peg import build_code

# 170 degree-2, 50 degree-3 and 44 degree-8 variable nodes (842 edges).
DEGREES = np.repeat([2, 3, 8], [170, 50, 44])
SEED = 7

if __name__ == "__main__":
    code = build_code(264, 88, DEGREES, seed=SEED)
    with open("src/rsura/ldpc/data/peg_264_88.alist", "w") as fh:
        fh.write(to_alist(code))
    print(code)
