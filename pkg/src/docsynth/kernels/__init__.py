"""Hot pixel kernels with a compiled implementation and a numpy fallback.

The compiled extension is used when it imports; otherwise the numpy path is
selected. Both produce identical bytes, so the choice only affects speed.
``use_backend`` switches explicitly (tests and benchmarks use it).
"""

from __future__ import annotations

import logging
from contextlib import contextmanager
from types import ModuleType

from . import _python

log = logging.getLogger(__name__)

try:
    from . import _native  # type: ignore[attr-defined]
except ImportError:  # extension not built
    _native = None
    log.debug("compiled kernels unavailable, using numpy fallback")

_active: ModuleType = _native if _native is not None else _python


def available_backends() -> list[str]:
    return ["native", "python"] if _native is not None else ["python"]


def backend() -> str:
    return _active.NAME


def use_backend(name: str) -> None:
    global _active
    if name == "python":
        _active = _python
    elif name == "native":
        if _native is None:
            raise RuntimeError("compiled kernels are not built; run `pip install -e .`")
        _active = _native
    else:
        raise ValueError(f"unknown backend {name!r}")


@contextmanager
def backend_override(name: str):
    previous = backend()
    use_backend(name)
    try:
        yield
    finally:
        use_backend(previous)


def thin(plane):
    return _active.thin(plane)


def warp_affine(img, inv, out_h: int, out_w: int, fill: int = 0, nearest: bool = False):
    return _active.warp_affine(img, inv, int(out_h), int(out_w), int(fill), bool(nearest))


def remap(img, map_x, map_y, fill: int = 0, nearest: bool = False):
    return _active.remap(img, map_x, map_y, int(fill), bool(nearest))
