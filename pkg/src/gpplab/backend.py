"""Selects the compiled simulation core, falling back to pure NumPy.

The compiled extension ``gpplab._native`` (built from ``_native.pyx``) and
the pure-Python module ``gpplab._fallback`` implement the same contract.
Whichever is picked here is used consistently everywhere, so results that
must agree exactly (batch paths versus streaming summaries, for instance)
always come from the same arithmetic.

Set ``GPPLAB_FORCE_FALLBACK=1`` to skip the extension, e.g. for the
benchmark in ``benchmarks/bench_kernels.py`` or to reproduce results from
an environment without a compiler.
"""
import os

from . import _fallback

KIND_LAPLACE = _fallback.KIND_LAPLACE
KIND_GAUSSIAN = _fallback.KIND_GAUSSIAN

if os.environ.get("GPPLAB_FORCE_FALLBACK", "") not in ("", "0"):
    impl = _fallback
    BACKEND = "fallback"
else:
    try:
        from . import _native

        impl = _native
        BACKEND = "native"
    except ImportError:
        impl = _fallback
        BACKEND = "fallback"


def using_native() -> bool:
    return BACKEND == "native"
