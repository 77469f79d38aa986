"""Selects the likelihood kernel backend at import time.

The compiled extension (``rankspace._ckernels``) is preferred; the
pure-numpy module (``rankspace._pykernels``) is a drop-in fallback with
the same API.  Set ``RANKSPACE_BACKEND=python`` or ``compiled`` to force
one (``compiled`` raises if the extension is missing).  Both backends are
statistically identical; floating-point reduction order differs, so long
chains are bit-reproducible per backend, not across backends.
"""

from __future__ import annotations

import os

_ENV_VAR = "RANKSPACE_BACKEND"


def _load():
    choice = os.environ.get(_ENV_VAR, "auto").lower()
    if choice not in ("auto", "compiled", "python"):
        raise ValueError(
            f"{_ENV_VAR} must be 'auto', 'compiled' or 'python', got {choice!r}"
        )
    if choice in ("auto", "compiled"):
        try:
            from . import _ckernels

            return _ckernels, "compiled"
        except ImportError:
            if choice == "compiled":
                raise
    from . import _pykernels

    return _pykernels, "python"


kernels, BACKEND = _load()
