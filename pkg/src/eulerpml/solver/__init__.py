"""Time-domain staggered-grid solver with the auxiliary-field PML.

Two interchangeable step kernels exist: a compiled extension
(eulerpml.solver._kernels) and a pure-numpy fallback (kernels_py). The
compiled one is preferred when importable; set EULERPML_BACKEND=python or
EULERPML_BACKEND=compiled to force a choice.
"""

import os

from . import kernels_py as _py_backend

try:
    from . import _kernels as _compiled_backend
except ImportError:
    _compiled_backend = None

_FORCED = os.environ.get("EULERPML_BACKEND", "").strip().lower()
if _FORCED == "python":
    _backend = _py_backend
elif _FORCED == "compiled":
    if _compiled_backend is None:
        raise ImportError(
            "EULERPML_BACKEND=compiled but the _kernels extension is not built"
        )
    _backend = _compiled_backend
elif _FORCED:
    raise ValueError(f"unknown EULERPML_BACKEND value: {_FORCED!r}")
else:
    _backend = _compiled_backend if _compiled_backend is not None else _py_backend


def get_backend():
    return _backend


def backend_name() -> str:
    return _backend.BACKEND


def set_backend(name: str):
    """Switch kernels at runtime (used by tests and the benchmark)."""
    global _backend
    if name == "python":
        _backend = _py_backend
    elif name == "compiled":
        if _compiled_backend is None:
            raise ImportError("the _kernels extension is not built")
        _backend = _compiled_backend
    else:
        raise ValueError(f"unknown backend: {name!r}")


from .driver import RunOutput, Stepper, run, step  # noqa: E402
from .state import (  # noqa: E402
    FieldState,
    RegionMap,
    build_region_map,
    dx_pml_aux_update,
    init_state,
    vorticity,
)

__all__ = [
    "FieldState",
    "RegionMap",
    "RunOutput",
    "Stepper",
    "backend_name",
    "build_region_map",
    "dx_pml_aux_update",
    "get_backend",
    "init_state",
    "run",
    "set_backend",
    "step",
    "vorticity",
]
