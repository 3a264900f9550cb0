from functools import lru_cache
from typing import Tuple

import numpy as np


@lru_cache(maxsize=32)
def gauss_legendre(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss–Legendre nodes and weights mapped to [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (x + 1.0)
    t.setflags(write=False)
    half = 0.5 * w
    half.setflags(write=False)
    return t, half
