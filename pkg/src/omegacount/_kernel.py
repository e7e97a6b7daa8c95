"""Backend selection for the mixture-update kernel.

The compiled Cython kernel is preferred when its extension imported cleanly;
otherwise the numpy fallback runs. The OMEGACOUNT_BACKEND environment
variable forces a choice: "cython" (error if missing) or "numpy".
"""

from __future__ import annotations

import os

from . import _mog_py

try:
    from . import _mog_cy
except ImportError:
    _mog_cy = None

_NAMES = {
    "numpy": _mog_py,
    "python": _mog_py,
    "cython": _mog_cy,
    "compiled": _mog_cy,
}


def get_kernel(name: str | None = None):
    """Resolve a kernel's update_grid; name=None selects the default backend."""
    if name is None:
        name = BACKEND
    try:
        module = _NAMES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; use 'cython' or 'numpy'") from None
    if module is None:
        raise RuntimeError("compiled backend requested but the extension is not built")
    return module.update_grid


def available_backends() -> tuple[str, ...]:
    backends = ["numpy"]
    if _mog_cy is not None:
        backends.insert(0, "cython")
    return tuple(backends)


_forced = os.environ.get("OMEGACOUNT_BACKEND", "").strip().lower()
if _forced:
    if _forced not in _NAMES:
        raise RuntimeError(f"OMEGACOUNT_BACKEND={_forced!r} is not a known backend")
    if _NAMES[_forced] is None:
        raise RuntimeError("OMEGACOUNT_BACKEND requests the compiled kernel, but it is not built")
    BACKEND = "cython" if _NAMES[_forced] is _mog_cy else "numpy"
else:
    BACKEND = "cython" if _mog_cy is not None else "numpy"

update_grid = get_kernel(BACKEND)
