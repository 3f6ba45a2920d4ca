"""Averaging operators, the convex-set-valued dyadic maximal operator,
shifted dyadic grids, the Christ-Goldberg maximal operator, the exhausting
operator, L^p norms of set functions, and the Hausdorff-based metric.

The dyadic maximal operator is localized: only dyadic subcubes of the base
cube participate, so reported values near the boundary are smaller than the
whole-space operator's.  A brute-force interval oracle over a uniform
endpoint grid provides the non-dyadic comparison at n=1.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _backend
from .bodies import (
    Ellipsoid,
    hausdorff,
    hull_union,
    minkowski_sum,
    promote,
    scale,
    set_norm,
)
from .directions import canonical_grid
from .errors import DomainMismatch
from .grid import DyadicDomain, MatrixWeight, ScalarField, SetFunction, VectorField

SHIFTS_1D = (0.0, 1.0 / 3.0, -1.0 / 3.0)


@dataclass(frozen=True)
class MaximalOptions:
    shift: Optional[tuple] = None  # tau in {0, +-1/3}^n, or None for unshifted
    include_base_cube: bool = True
    brute_force_resolution: Optional[float] = None


# ---------------------------------------------------------------------------
# averaging


def _mink_average(bodies, weights):
    """Exact weighted Minkowski combination sum_i w_i K_i (pairwise fold)."""
    items = [scale(b, w) for b, w in zip(bodies, weights) if w > 0]
    while len(items) > 1:
        nxt = [
            minkowski_sum(items[k], items[k + 1]) if k + 1 < len(items) else items[k]
            for k in range(0, len(items), 2)
        ]
        items = nxt
    return items[0]


def aumann_average(f: SetFunction, cube):
    """Average of a set function over a dyadic cube: the measure-weighted
    Minkowski sum of its cell bodies (exact for piecewise-constant data)."""
    level, index = cube
    cells = f.domain.cube_cells(level, index)
    w = 1.0 / len(cells)
    return _mink_average([f.cells[i] for i in cells], [w] * len(cells))


def cube_averages(f: SetFunction):
    """Averages over every dyadic cube, assembled bottom-up.

    Returns {(level, index): body}.  Exact polygon arithmetic at d=2.
    """
    dom = f.domain
    out = {}
    per_node = 2**dom.n
    for i, b in enumerate(f.cells):
        out[(dom.level, i)] = promote(b) if b.dim == 2 else b
    for lev in range(dom.level - 1, -1, -1):
        for i in range(dom.num_cubes(lev)):
            kids = [out[(lev + 1, c)] for c in dom.cube_children(lev, i)]
            out[(lev, i)] = _mink_average(kids, [1.0 / per_node] * per_node)
    return out


# ---------------------------------------------------------------------------
# dyadic maximal operator


def _ancestor_list(domain, cell, opts):
    anc = domain.ancestors(cell)
    if not opts.include_base_cube:
        anc = [a for a in anc if a[0] > 0]
    return anc


def dyadic_maximal(f: SetFunction, opts: MaximalOptions = MaximalOptions()):
    """M^d F: per cell, the closed convex hull of the averages over all
    dyadic cubes containing the cell.  Exact at d=2.

    F(x) is always contained in M^d F(x) since the cell itself is one of
    the participating cubes.
    """
    if opts.shift is not None and any(t != 0 for t in opts.shift):
        return shifted_maximal(f, opts.shift, opts=opts)
    avgs = cube_averages(f)
    cells = []
    for i in range(f.domain.num_cells):
        anc = _ancestor_list(f.domain, i, opts)
        cells.append(hull_union([avgs[a] for a in anc]))
    return SetFunction(f.domain, cells)


def maximal_set_norms(f: SetFunction, w: Optional[MatrixWeight] = None, opts=MaximalOptions()):
    """Per cell, |W(x) M^d F(x)| without materializing the hulls.

    The norm of a hull of a union is the max of the member norms, so this
    equals the max over ancestors of the norm of the cube average.
    """
    avgs = cube_averages(f)
    out = np.empty(f.domain.num_cells)
    for i in range(f.domain.num_cells):
        wm = None if w is None else w.cells[i]
        anc = _ancestor_list(f.domain, i, opts)
        out[i] = max(set_norm(avgs[a], wm) for a in anc)
    return out


def supports_matrix(f: SetFunction, dirs):
    return np.vstack([b.supports(dirs) for b in f.cells])


def dyadic_maximal_supports(f: SetFunction, dirs):
    """Support values of M^d F on a direction set, by one tree sweep per
    direction (support of average = average of supports, support of hull =
    max of supports).  n=1 fast path via the kernel backend."""
    sup = supports_matrix(f, dirs)
    if f.domain.n == 1:
        return _backend.tree_max_avg(sup)
    return _tree_max_avg_2d(sup, f.domain)


def _tree_max_avg_2d(vals, dom):
    m = 2**dom.level
    k = vals.shape[1]
    grid = vals.reshape(m, m, k)
    out = vals.copy()
    cur = grid
    for lev in range(1, dom.level + 1):
        half = m >> lev
        cur = 0.25 * (cur[0::2, 0::2] + cur[0::2, 1::2] + cur[1::2, 0::2] + cur[1::2, 1::2])
        rep = np.repeat(np.repeat(cur, 1 << lev, axis=0), 1 << lev, axis=1)
        out = np.maximum(out, rep.reshape(-1, k))
    return out


# ---------------------------------------------------------------------------
# shifted grids


def _shifted_cube_bounds(dom, k, x, tau):
    """Bounds of the level-k cube of the tau-shifted grid containing x."""
    side = dom.size / 2**k
    offset = ((-1) ** k) * tau * side
    lo0 = dom.origin[0] + offset
    m = int(np.floor((x - lo0) / side))
    return lo0 + m * side, lo0 + (m + 1) * side


def _average_over_interval(f: SetFunction, a, b):
    """Exact average of a piecewise-constant set function over [a, b) at
    n=1, clipped to the domain."""
    dom = f.domain
    lo = max(a, dom.origin[0])
    hi = min(b, dom.origin[0] + dom.size)
    if hi <= lo:
        return None
    w = dom.cell_width
    i0 = int(np.floor((lo - dom.origin[0]) / w))
    i1 = min(int(np.ceil((hi - dom.origin[0]) / w)), dom.num_cells)
    bodies, weights = [], []
    total = hi - lo
    for i in range(i0, i1):
        clo = dom.origin[0] + i * w
        chi = clo + w
        overlap = min(chi, hi) - max(clo, lo)
        if overlap > 0:
            bodies.append(f.cells[i])
            weights.append(overlap / total)
    return _mink_average(bodies, weights)


def shifted_maximal(f: SetFunction, tau, extra_levels=0, opts=MaximalOptions()):
    """M^tau F on the (1/3)-shifted dyadic grid, clipped to the domain.

    The result lives on the domain refined by ``extra_levels`` (shifted
    cube boundaries cut through cells, so values are taken at the refined
    cell midpoints).  tau = 0 reproduces the unshifted dyadic operator.
    """
    if f.domain.n != 1:
        raise NotImplementedError("shifted grids are implemented at n=1")
    tau = float(tau[0]) if isinstance(tau, (tuple, list)) else float(tau)
    dom = f.domain
    fine = DyadicDomain(n=1, origin=dom.origin, size=dom.size, level=dom.level + extra_levels)
    max_level = dom.level + extra_levels
    cells = []
    for i in range(fine.num_cells):
        x = fine.cell_midpoint(i)[0]
        bodies = []
        lo_level = 0 if opts.include_base_cube else 1
        for k in range(lo_level, max_level + 1):
            a, b = _shifted_cube_bounds(dom, k, x, tau)
            avg = _average_over_interval(f, a, b)
            if avg is not None:
                bodies.append(avg)
        cells.append(hull_union(bodies))
    return SetFunction(fine, cells)


def combined_shifted_bound(f: SetFunction, extra_levels=2):
    """The Minkowski sum over all shifts tau in {0, +-1/3} of M^tau F; the
    non-dyadic maximal operator is contained in a dimensional multiple."""
    parts = [shifted_maximal(f, tau, extra_levels=extra_levels) for tau in SHIFTS_1D]
    dom = parts[0].domain
    cells = [
        _mink_average([p.cells[i] for p in parts], [1.0, 1.0, 1.0])
        for i in range(dom.num_cells)
    ]
    return SetFunction(dom, cells)


# ---------------------------------------------------------------------------
# brute-force interval oracle (n=1)


def interval_maximal_supports(f: SetFunction, points, resolution, dirs=None):
    """Supports of the all-intervals maximal operator at given points.

    Intervals have endpoints on the uniform grid of the given resolution
    inside the domain; this is the independent oracle for the dyadic and
    shifted-grid operators.  Returns (len(points), N) support values.
    """
    dom = f.domain
    if dom.n != 1:
        raise NotImplementedError("the interval oracle is one-dimensional")
    dirs = canonical_grid(2).dirs if dirs is None else np.asarray(dirs, dtype=float)
    lo, hi = dom.origin[0], dom.origin[0] + dom.size
    n_grid = int(round(dom.size / resolution))
    grid_pts = lo + resolution * np.arange(n_grid + 1)
    # Per-direction prefix integral of the cell supports.
    sup = supports_matrix(f, dirs)  # (C, N)
    w = dom.cell_width
    pref = np.concatenate([np.zeros((1, sup.shape[1])), np.cumsum(sup * w, axis=0)], axis=0)

    def integral_to(t):
        # integral of support over [lo, t], exact for piecewise data
        pos = (t - lo) / w
        i = np.clip(np.floor(pos).astype(int), 0, dom.num_cells)
        frac = pos - i
        base = pref[i]
        part = np.where(i < dom.num_cells, frac * w, 0.0)[..., None] * np.where(
            (i < dom.num_cells)[..., None], sup[np.minimum(i, dom.num_cells - 1)], 0.0
        )
        return base + part

    ints = integral_to(grid_pts)  # (G+1, N)
    out = np.empty((len(points), dirs.shape[0]))
    for j, x in enumerate(points):
        left = grid_pts <= x
        right = grid_pts > x
        a_ints = ints[left]
        b_ints = ints[right]
        a_pts = grid_pts[left]
        b_pts = grid_pts[right]
        lengths = b_pts[None, :] - a_pts[:, None]
        best = np.full(dirs.shape[0], -np.inf)
        for k in range(dirs.shape[0]):
            vals = (b_ints[None, :, k] - a_ints[:, None, k]) / lengths
            best[k] = vals.max()
        out[j] = best
    return out


# ---------------------------------------------------------------------------
# weighted operators and norms


def christ_goldberg(w: MatrixWeight, f: VectorField, opts=MaximalOptions()):
    """M_W f(x): per cell, the max over dyadic ancestors of the average of
    |W(x) W^{-1}(y) f(y)| over the cube."""
    if w.domain != f.domain:
        raise DomainMismatch("weight and field domains differ")
    winv = w.inverse()
    if w.domain.n == 1 and w.d == 2 and opts.include_base_cube:
        g = _backend.cg_values(w.cells, winv.cells, f.cells)
        return ScalarField(w.domain, _backend.ancestor_max_mean_rows(g))
    dom = w.domain
    gvec = np.einsum("yij,yj->yi", winv.cells, f.cells)
    out = np.empty(dom.num_cells)
    for i in range(dom.num_cells):
        vals = np.linalg.norm(gvec @ w.cells[i].T, axis=1)
        best = -np.inf
        for lev, idx in dom.ancestors(i):
            if lev == 0 and not opts.include_base_cube:
                continue
            sel = dom.cube_cells(lev, idx)
            best = max(best, float(np.mean(vals[sel])))
        out[i] = best
    return ScalarField(dom, out)


def exhaust(w: MatrixWeight, h: SetFunction):
    """N_W H: per cell the smallest W-aligned ellipsoid multiple containing
    the body; an isometry for the weighted L^p norms."""
    if w.domain != h.domain:
        raise DomainMismatch("weight and set function domains differ")
    winv = w.inverse()
    cells = [
        Ellipsoid(set_norm(h.cells[i], w.cells[i]) * winv.cells[i])
        for i in range(w.domain.num_cells)
    ]
    return SetFunction(w.domain, cells)


def lpk_norm(f: SetFunction, w: Optional[MatrixWeight] = None, p=2.0):
    """The L^p norm of x -> |W(x) F(x)| (exact cell sums; p may be inf)."""
    if w is not None and w.domain != f.domain:
        raise DomainMismatch("weight and set function domains differ")
    vals = np.array(
        [
            set_norm(f.cells[i], None if w is None else w.cells[i])
            for i in range(f.domain.num_cells)
        ]
    )
    if np.isinf(p):
        return float(vals.max())
    mu = f.domain.cell_measure
    return float(np.sum(vals**p * mu) ** (1.0 / p))


def lp_norm_vec(f: VectorField, w: Optional[MatrixWeight] = None, p=2.0):
    """The L^p norm of x -> |W(x) f(x)| for a vector field."""
    vals = (
        np.linalg.norm(f.cells, axis=1)
        if w is None
        else np.linalg.norm(np.einsum("yij,yj->yi", w.cells, f.cells), axis=1)
    )
    if np.isinf(p):
        return float(vals.max())
    mu = f.domain.cell_measure
    return float(np.sum(vals**p * mu) ** (1.0 / p))


def weak_level_measure(f: SetFunction, lam, opts=MaximalOptions()):
    """Lebesgue measure of the set where |M^d F| exceeds lam."""
    if lam <= 0:
        raise ValueError("level must be positive")
    norms = maximal_set_norms(f, None, opts)
    return float(np.sum(norms > lam) * f.domain.cell_measure)


def dp_metric(f: SetFunction, g: SetFunction, w: Optional[MatrixWeight] = None, p=2.0):
    """Integrated Hausdorff distance between two set functions."""
    if f.domain != g.domain:
        raise DomainMismatch("set functions live on different domains")
    vals = np.array(
        [
            hausdorff(f.cells[i], g.cells[i], None if w is None else w.cells[i])
            for i in range(f.domain.num_cells)
        ]
    )
    if np.isinf(p):
        return float(vals.max())
    mu = f.domain.cell_measure
    return float(np.sum(vals**p * mu) ** (1.0 / p))
