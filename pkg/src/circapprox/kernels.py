"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the numpy fallback.
Set ``CIRCAPPROX_PURE=1`` to force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"
if os.environ.get("CIRCAPPROX_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _fallback
else:
    _impl = _fallback

eval_circuit_words = _impl.eval_circuit_words
gf_mul_array = _impl.gf_mul_array
quad_block_sums = _impl.quad_block_sums

__all__ = ["BACKEND", "eval_circuit_words", "gf_mul_array", "quad_block_sums"]
