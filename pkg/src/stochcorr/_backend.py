"""Kernel backend selection.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``STOCHCORR_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the numpy implementation is used.
"""

import os

from . import _kernels_py

_force_py = os.environ.get("STOCHCORR_PURE_PYTHON", "") not in ("", "0")

if _force_py:
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _kernels_py

BACKEND = "compiled" if _impl is not _kernels_py else "python"

log_kv = _impl.log_kv
kdist_cdf = _impl.kdist_cdf


def implementations():
    """Mapping of available backend names to kernel modules."""
    impls = {"python": _kernels_py}
    try:
        from . import _kernels
    except ImportError:  # pragma: no cover
        pass
    else:
        impls["compiled"] = _kernels
    return impls
