"""Search backends: compiled kernels with a pure-Python fallback.

The hot loops of the Monte Carlo agents (random playouts, flat playout
scoring and decoupled-UCT tree search) are implemented twice: a generic
pure-Python version in :mod:`.reference` that works on any perfect-
information state, and game-specific compiled kernels in ``_speedups``
(built from Cython at install time). Both implement the identical
algorithms over the identical random stream, so a given seed produces the
same result on either backend; the compiled one is just much faster.

The backend is selected at import: the extension is used when present.
Set the environment variable ``BELIEFGAMES_BACKEND`` to ``pure`` or
``compiled`` (or call :func:`set_backend`) to override.
"""

from __future__ import annotations

import os

from ..errors import InvalidConfigError
from . import reference

try:
    from . import _speedups
except ImportError:
    _speedups = None

_forced: str | None = None


def available_backends() -> tuple[str, ...]:
    return ("pure", "compiled") if _speedups is not None else ("pure",)


def set_backend(name: str | None) -> None:
    """Force a backend ("pure"/"compiled") or restore auto-selection (None)."""
    global _forced
    if name is not None and name not in ("pure", "compiled", "auto"):
        raise InvalidConfigError(f"unknown backend {name!r}")
    _forced = None if name in (None, "auto") else name


def backend_name() -> str:
    """The backend that will actually be used."""
    choice = _forced or os.environ.get("BELIEFGAMES_BACKEND", "auto")
    if choice == "pure":
        return "pure"
    if choice == "compiled":
        if _speedups is None:
            raise InvalidConfigError("compiled backend requested but extension not built")
        return "compiled"
    return "compiled" if _speedups is not None else "pure"


def compiled():
    """The compiled kernel module, or None when the pure fallback is active."""
    return _speedups if backend_name() == "compiled" else None
