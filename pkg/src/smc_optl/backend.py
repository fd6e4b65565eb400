"""Numeric backend selection.

The hot numeric kernels exist twice: compiled with numba
(`kernels_numba`) and as vectorised NumPy (`kernels_numpy`). The active
set is chosen once, at import time, from the ``SMC_OPTL_BACKEND``
environment variable:

* ``auto`` (default) -- numba if it imports, NumPy otherwise
* ``numba``          -- require numba, fail if unavailable
* ``numpy``          -- force the pure-NumPy path
"""

import os

_CHOICES = ("auto", "numba", "numpy")


def resolve_backend() -> str:
    choice = os.environ.get("SMC_OPTL_BACKEND", "auto").strip().lower()
    if choice not in _CHOICES:
        raise ValueError(
            f"SMC_OPTL_BACKEND={choice!r} is not one of {_CHOICES}"
        )
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise ImportError(
                "SMC_OPTL_BACKEND=numba but numba is not importable"
            ) from None
        return "numpy"
    return "numba"


BACKEND = resolve_backend()
