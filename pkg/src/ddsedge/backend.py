"""Kernel backend selection.

The package ships a compiled Cython core for the hot kernels with a pure
numpy fallback. The choice is made once at import:

* ``DDSEDGE_BACKEND=python``  force the numpy kernels
* ``DDSEDGE_BACKEND=cython``  require the compiled kernels (ImportError if absent)
* unset / ``auto``            compiled if available, numpy otherwise
"""

import os

from ddsedge import _kernels_np

_requested = os.environ.get("DDSEDGE_BACKEND", "auto")

try:
    from ddsedge import _speedups as _compiled
except ImportError:
    _compiled = None

if _requested == "cython" and _compiled is None:
    raise ImportError(
        "DDSEDGE_BACKEND=cython but the compiled extension is not available; "
        "reinstall without DDSEDGE_PURE_PYTHON=1"
    )

if _requested == "python" or _compiled is None:
    kernels = _kernels_np
else:
    kernels = _compiled

BACKEND = kernels.BACKEND_NAME


def available_backends():
    out = [_kernels_np]
    if _compiled is not None:
        out.append(_compiled)
    return out
