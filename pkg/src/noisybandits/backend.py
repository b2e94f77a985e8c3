"""Kernel backend selection.

Hot inner loops (the independent-set search and the per-round simulation
loop) exist in two forms: a numba ``@njit`` kernel and a pure-numpy
fallback. The fallback is selected by setting the environment variable
``NOISYBANDITS_NUMBA=0`` before import, or automatically when numba is
not importable. ``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import os

_FLAG = os.environ.get("NOISYBANDITS_NUMBA", "1").strip().lower()
_WANT_NUMBA = _FLAG not in ("0", "false", "off", "no")

if _WANT_NUMBA:
    try:
        from numba import njit  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
