"""Kernel selection: compiled extension if importable, numpy otherwise.

Set ``WRLDA_PURE_PYTHON=1`` to force the numpy kernels.
"""
import os

from . import _pykernels

if os.environ.get("WRLDA_PURE_PYTHON"):
    _impl = _pykernels
    NAME = "python"
else:
    try:
        from . import _kernels as _impl
        NAME = "cython"
    except ImportError:
        _impl = _pykernels
        NAME = "python"

digamma = _impl.digamma
trigamma = _impl.trigamma
e_step_corpus = _impl.e_step_corpus
