"""Matrix-element kernels.

``assemble`` is the numba loop kernel when numba is importable and not
disabled through ``ECGFIELD_DISABLE_NUMBA``; otherwise it is the batched
numpy implementation. Both are always importable by name for comparison.
"""
from .._accel import HAVE_NUMBA
from . import _loops, _vectorized
from ._vectorized import overlap_cross

BACKEND = "numba" if HAVE_NUMBA else "numpy"

assemble_loops = _loops.assemble
assemble_vectorized = _vectorized.assemble

if HAVE_NUMBA:
    assemble = _loops.assemble
    boys0 = _loops.boys0
else:
    assemble = _vectorized.assemble
    boys0 = _vectorized.boys0

__all__ = [
    "BACKEND",
    "HAVE_NUMBA",
    "assemble",
    "assemble_loops",
    "assemble_vectorized",
    "boys0",
    "overlap_cross",
]
