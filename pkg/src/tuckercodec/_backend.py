"""Backend selection for the hot kernels.

The jitted kernels are used when numba imports, unless the environment
variable ``TUCKERCODEC_DISABLE_JIT`` is set to a true value, which selects
the pure-numpy path.  Both backends produce identical results.
"""

import os

DISABLE_ENV = "TUCKERCODEC_DISABLE_JIT"


def jit_disabled() -> bool:
    return os.environ.get(DISABLE_ENV, "").strip().lower() not in ("", "0", "false", "no")


BACKEND = "numpy"
if not jit_disabled():
    try:
        import numba  # noqa: F401
    except ImportError:
        pass
    else:
        BACKEND = "numba"
