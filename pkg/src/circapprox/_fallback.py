"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""
import numpy as np

_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)


def _nwords(width):
    return 1 if width <= 6 else 1 << (width - 6)


def _input_table(width):
    if width <= 6:
        u = np.arange(64, dtype=np.uint64)
        bits = (u >> np.uint64(width - 1)) & np.uint64(1)
        return np.array([int((bits << u).sum())], dtype=np.uint64)
    nw = _nwords(width)
    buf = np.zeros(nw, dtype=np.uint64)
    buf[nw // 2:] = _ONES
    return buf


def _apply(op, a, b):
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.uint64)
    if op & 1:
        out |= ~a & ~b
    if op & 2:
        out |= ~a & b
    if op & 4:
        out |= a & ~b
    if op & 8:
        out |= a & b
    return out


def eval_circuit_words(n, ops, left, right, output):
    """Packed truth table (LSB-first words) of a circuit over ``n`` inputs.

    Every intermediate table is kept only over the suffix of variables its
    support reaches, so gates near the leaves of a junta table stay small.
    """
    ngates = len(ops)
    ops = np.asarray(ops).tolist()
    left = np.asarray(left).tolist()
    right = np.asarray(right).tolist()
    nrefs = n + 2 + ngates
    width = [0] * nrefs
    tab = [None] * nrefs
    tab[0] = np.zeros(1, dtype=np.uint64)
    tab[1] = np.full(1, _ONES, dtype=np.uint64)
    for i in range(n):
        width[2 + i] = n - i
        tab[2 + i] = _input_table(n - i)
    last = [-1] * nrefs
    for g in range(ngates):
        last[left[g]] = g
        last[right[g]] = g
    last[output] = ngates

    for g in range(ngates):
        la, lb = left[g], right[g]
        wo = max(width[la], width[lb])
        no = _nwords(wo)
        a, b = tab[la], tab[lb]
        if a.size != no:
            a = np.tile(a, no // a.size)
        if b.size != no:
            b = np.tile(b, no // b.size)
        r = n + 2 + g
        tab[r] = _apply(ops[g], a, b)
        width[r] = wo
        if last[la] == g and la >= 2:
            tab[la] = None
        if last[lb] == g and lb >= 2:
            tab[lb] = None

    out = tab[output]
    full = _nwords(n)
    return np.tile(out, full // out.size).astype(np.uint64, copy=True)


def gf_mul_array(a, b, k, modulus):
    """Elementwise product in GF(2^k) = GF(2)[x]/(modulus)."""
    x = np.array(a, dtype=np.uint64, copy=True)
    y = np.asarray(b, dtype=np.uint64)
    acc = np.zeros_like(x)
    top = np.uint64(1 << k)
    mod = np.uint64(modulus)
    one = np.uint64(1)
    for j in range(k):
        sel = ((y >> np.uint64(j)) & one).astype(bool)
        acc[sel] ^= x[sel]
        x <<= one
        hit = (x & top) != 0
        x[hit] ^= mod
    return acc


def quad_block_sums(f, w, x2, x3, c, m2, m3, m4, ell):
    """Per-block sums of w(x) (-1)^(f(x) + G(x)), G(x) = c + <x,m2> + <x^2,m3> + <x^3,m4>."""
    x = np.arange(f.shape[0], dtype=np.uint32)
    bits = np.asarray(f, dtype=np.uint8) ^ np.uint8(c & 1)
    for p, m in ((x, m2), (x2, m3), (x3, m4)):
        if m:
            bits ^= np.bitwise_count(p & np.uint32(m)) & np.uint8(1)
    signed = np.where(bits.astype(bool), -np.asarray(w), np.asarray(w))
    return signed.reshape(-1, 1 << ell).sum(axis=1)
