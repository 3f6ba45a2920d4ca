"""Pure-numpy fallback implementations of the hot kernels.

Same signatures and semantics as the compiled extension ``mwlab._kernels``;
all kernels assume a one-dimensional dyadic domain whose 2^J cells are
stored in position order, so every dyadic block is contiguous.
"""

import numpy as np


def _levels(c):
    j = int(np.log2(c))
    if 2**j != c:
        raise ValueError("cell count must be a power of two")
    return j


def tree_max_avg(vals):
    """Per leaf and column, the max over dyadic levels of the block mean.

    vals: (C, K).  Returns (C, K): out[i, k] = max over levels l of the
    mean of vals[:, k] over the level-l block containing leaf i.
    """
    vals = np.asarray(vals, dtype=float)
    c = vals.shape[0]
    j = _levels(c)
    out = vals.copy()
    sums = vals.copy()
    for lev in range(1, j + 1):
        nblk = c >> lev
        sums = sums[0 : 2 * nblk : 2] + sums[1 : 2 * nblk : 2]
        means = sums / float(1 << lev)
        out = np.maximum(out, np.repeat(means, 1 << lev, axis=0))
    return out


def pair_opnorm(a, b):
    """out[x, y] = |a[x] @ b[y]|_op for stacks of 2x2 matrices."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    prod = np.einsum("xij,yjk->xyik", a, b)
    f = np.sum(prod * prod, axis=(2, 3))
    det = prod[..., 0, 0] * prod[..., 1, 1] - prod[..., 0, 1] * prod[..., 1, 0]
    disc = np.maximum(f * f - 4.0 * det * det, 0.0)
    return np.sqrt(0.5 * (f + np.sqrt(disc)))


def cg_values(a, b, f):
    """out[x, y] = |a[x] @ b[y] @ f[y]| for 2x2 stacks and vectors f."""
    a = np.asarray(a, dtype=float)
    g = np.einsum("yij,yj->yi", np.asarray(b, dtype=float), np.asarray(f, dtype=float))
    v = np.einsum("xij,yj->xyi", a, g)
    return np.linalg.norm(v, axis=2)


def ancestor_max_mean_rows(g):
    """out[x] = max over levels of the mean of g[x, :] over the block
    containing x.  g: (C, C) with rows indexed by the evaluation cell."""
    g = np.asarray(g, dtype=float)
    c = g.shape[0]
    j = _levels(c)
    pref = np.concatenate([np.zeros((c, 1)), np.cumsum(g, axis=1)], axis=1)
    x = np.arange(c)
    out = np.full(c, -np.inf)
    for lev in range(j + 1):
        width = 1 << lev
        lo = (x >> lev) << lev
        means = (pref[x, lo + width] - pref[x, lo]) / float(width)
        out = np.maximum(out, means)
    return out


def ellip_max_norm(c, a, v, dirs, chunk=32):
    """Weighted ellipsoid-family maximal norm.

    out[x] = max over dyadic blocks containing x and over directions w of
    the block mean of c[y] * |a[y] @ (v[x] @ w)|.

    c: (C,) nonnegative scalars, a: (C, 2, 2), v: (C, 2, 2),
    dirs: (K, 2).  Linear and monotone in c by construction, so the scalar
    operators built on it are exactly sublinear.
    """
    c = np.asarray(c, dtype=float)
    a = np.asarray(a, dtype=float)
    v = np.asarray(v, dtype=float)
    dirs = np.asarray(dirs, dtype=float)
    cc = c.shape[0]
    j = _levels(cc)
    out = np.empty(cc)
    idx = np.arange(cc)
    for lo_x in range(0, cc, chunk):
        hi_x = min(lo_x + chunk, cc)
        z = np.einsum("xij,kj->xki", v[lo_x:hi_x], dirs)  # (B, K, 2)
        t = np.einsum("yij,xkj->yxki", a, z)  # (C, B, K, 2)
        vals = c[:, None, None] * np.linalg.norm(t, axis=3)  # (C, B, K)
        pref = np.concatenate(
            [np.zeros((1,) + vals.shape[1:]), np.cumsum(vals, axis=0)], axis=0
        )
        best = np.full(vals.shape[1:], -np.inf)  # (B, K)
        for lev in range(j + 1):
            width = 1 << lev
            lo = (idx[lo_x:hi_x] >> lev) << lev
            means = (pref[lo + width, idx[lo_x:hi_x] - lo_x, :] - pref[lo, idx[lo_x:hi_x] - lo_x, :]) / float(width)
            best = np.maximum(best, means)
        out[lo_x:hi_x] = best.max(axis=1)
    return out
