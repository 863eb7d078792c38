"""Hot kernels: the compiled extension when importable, else the Python fallback.

Set ``FOGFED_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("FOGFED_PURE_PYTHON", "").strip().lower() not in ("", "0", "false", "no"):
    from ._kernels_py import failure_product, fifo_sojourn, harmonic_sum, select_index

    BACKEND = "python"
else:
    try:
        from ._kernels import failure_product, fifo_sojourn, harmonic_sum, select_index

        BACKEND = "cython"
    except ImportError:
        from ._kernels_py import failure_product, fifo_sojourn, harmonic_sum, select_index

        BACKEND = "python"

__all__ = ["BACKEND", "failure_product", "fifo_sojourn", "harmonic_sum", "select_index"]
