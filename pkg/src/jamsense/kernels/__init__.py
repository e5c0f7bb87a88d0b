"""Hot-kernel backend selection.

The compiled Cython extension is preferred when importable; the NumPy
fallback is always available. Set JAMSENSE_BACKEND=numpy or =cython to
force a choice (forcing cython raises if the extension is missing).
"""

import os

from . import numpy_backend

_forced = os.environ.get("JAMSENSE_BACKEND", "").strip().lower()

if _forced == "numpy":
    _impl = numpy_backend
elif _forced == "cython":
    from . import _ckernels as _impl  # noqa: F401
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = numpy_backend

conv1d_forward = _impl.conv1d_forward
conv1d_backward = _impl.conv1d_backward
fading_series = _impl.fading_series


def backend_name():
    return _impl.NAME


def available_backends():
    names = [numpy_backend]
    try:
        from . import _ckernels

        names.append(_ckernels)
    except ImportError:
        pass
    return {m.NAME: m for m in names}
