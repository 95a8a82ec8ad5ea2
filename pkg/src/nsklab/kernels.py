"""Backend selection for the hot time-stepping kernels.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``NSKLAB_PURE_PYTHON=1`` is set, the numpy fallback is
imported.  ``BACKEND`` names the active implementation.
"""

import os

from nsklab import _pykernels

if os.environ.get("NSKLAB_PURE_PYTHON", "") == "1":
    _active = _pykernels
else:
    try:
        from nsklab import _ckernels as _active
    except ImportError:  # extension not built
        _active = _pykernels

BACKEND = "compiled" if _active is not _pykernels else "python"
rhs = _active.rhs
rk4_step = _active.rk4_step


def backends():
    """Mapping of every importable backend name to its module."""
    found = {"python": _pykernels}
    try:
        from nsklab import _ckernels
        found["compiled"] = _ckernels
    except ImportError:
        pass
    return found
