"""Backend selection for the hot kernels.

The compiled extension ``kobalab._ccore`` is used when importable; otherwise
the numpy fallback in ``kobalab._pycore`` is. Setting the environment variable
``KOBALAB_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _pycore

KIND_POWER_SUM = _pycore.KIND_POWER_SUM
KIND_POLYDISC = _pycore.KIND_POLYDISC

_backend = None
if os.environ.get("KOBALAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ccore as _backend
    except ImportError:  # extension not built
        _backend = None

if _backend is None:
    BACKEND = "python"
    _impl = _pycore
else:
    BACKEND = "compiled"
    _impl = _backend

defining_values = _impl.defining_values
ray_scales = _impl.ray_scales
webster_walk = _impl.webster_walk
ray_hits = _impl.ray_hits


def backends():
    """Return ``{name: module}`` for every backend available in this process."""
    out = {"python": _pycore}
    if _backend is not None:
        out["compiled"] = _backend
    else:
        try:
            from . import _ccore
        except ImportError:
            pass
        else:
            out["compiled"] = _ccore
    return out
