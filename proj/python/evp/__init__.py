"""Holistic 3D motion decomposition: python bindings for the evp C++ core."""

try:
    # Installed layout: the extension module lives inside this package.
    from ._evp import *  # noqa: F401,F403
    from . import _evp as _ext
except ImportError:
    # Build-tree layout: the extension module sits next to the package on
    # PYTHONPATH (used by the ctest smoke tests).
    from _evp import *  # noqa: F401,F403
    import _evp as _ext

__all__ = [name for name in dir(_ext) if not name.startswith("_")]
__version__ = "0.1.0"
