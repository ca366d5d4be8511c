"""Backend selection for the SOR kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``DQDCAVITY_BACKEND=python`` to force the fallback.
"""

import os

from . import _sor_py

try:
    from . import _sor_ext
except ImportError:  # extension not built
    _sor_ext = None

BACKENDS = {"python": _sor_py}
if _sor_ext is not None:
    BACKENDS["compiled"] = _sor_ext

if os.environ.get("DQDCAVITY_BACKEND", "").lower() == "python" or _sor_ext is None:
    DEFAULT_BACKEND = "python"
else:
    DEFAULT_BACKEND = "compiled"


def get_backend(name=None):
    name = name or DEFAULT_BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable SOR backend {name!r}; "
                         f"available: {sorted(BACKENDS)}") from None
