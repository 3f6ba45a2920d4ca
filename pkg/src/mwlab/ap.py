"""Averaged norms, reducing operators, matrix Muckenhoupt-type constants
for p in [1, inf], the convex-set A1 constant, and scalar oracles.

All cube suprema range over the dyadic subcubes of the base cube, so every
reported constant is a lower bound for the corresponding all-cubes
supremum; reports carry the achieving cube and solver slack.
"""

from dataclasses import dataclass

import numpy as np

from . import _backend
from .bodies import SymPolygon, contains_scaled
from .directions import canonical_grid
from .errors import DegenerateBody, NotInAp
from .grid import MatrixWeight, SetFunction
from .john import john_of_constraints
from .maximal import cube_averages
from .spd import opnorm

VARIANTS = ("reducing", "roudenko", "a1", "ainfty")


@dataclass
class ApReport:
    constant: float
    variant: str
    p: float
    achieving_cube: tuple
    solver_slack: float = 0.0
    localized: bool = True  # sup over dyadic subcubes of the base cube only


def conjugate(p):
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


# ---------------------------------------------------------------------------
# averaged norms and reducing operators


class AvgNorm:
    """The L^p average over a cube of the weight norm: v -> (avg |W(y) v|^p)^{1/p}."""

    def __init__(self, w: MatrixWeight, cube, p):
        level, index = cube
        self.sel = w.domain.cube_cells(level, index)
        self.cells = w.cells[self.sel]
        self.p = float(p)
        self.dim = w.d

    def batch(self, vs):
        vals = np.linalg.norm(np.einsum("yij,nj->nyi", self.cells, np.asarray(vs, dtype=float)), axis=2)
        if np.isinf(self.p):
            return vals.max(axis=1)
        return (np.mean(vals**self.p, axis=1)) ** (1.0 / self.p)

    def __call__(self, v):
        return float(self.batch(np.asarray(v, dtype=float)[None, :])[0])


def avg_norm(w, cube, p):
    return AvgNorm(w, cube, p)


def reducing_operator(w, cube, p, passes=4, n_dirs=512):
    """John-derived SPD matrix R with |R v| <= avg-norm(v) <= sqrt(d) |R v|.

    Route: sample the unit-ball boundary of the averaged norm along a
    direction grid, take the polygon hull, inscribe its John ellipse, and
    invert.  Repeated frame-normalized resampling plus the inscribed
    regular-polygon bias factor cos(pi/N) removes the sampling bias; the
    sandwich is then enforced exactly on the sampled directions and the
    residual is reported as the solver slack.
    """
    norm = avg_norm(w, cube, p)
    if w.d != 2:
        raise NotImplementedError("reducing operators are implemented at d=2")
    frame = np.eye(2)
    # Escalating grids: the early passes only have to find the frame, the
    # final one sets the accuracy.
    for k in range(passes):
        n_pass = max(64, n_dirs >> (passes - 1 - k))
        dirs = canonical_grid(2, n_pass).dirs
        z = dirs @ frame.T
        vals = norm.batch(z)
        if np.any(vals <= 0):
            raise DegenerateBody("averaged norm vanishes on a direction")
        poly = SymPolygon(z / vals[:, None], symmetrize=False)
        nrm, off = poly.facets()
        m, _ = john_of_constraints(nrm, off)
        frame = m / np.cos(np.pi / len(dirs))
    dirs = canonical_grid(2, n_dirs).dirs
    r = np.linalg.inv(frame)
    r = 0.5 * (r + r.T)
    # Enforce |R v| <= N(v) on the sampled directions (uniform shrink).
    check = np.vstack([dirs, np.eye(2), -np.eye(2)])
    ratios = norm.batch(check) / np.linalg.norm(check @ r.T, axis=1)
    smin, smax = float(ratios.min()), float(ratios.max())
    if smin < 1.0:
        r = r * smin
        smax /= smin
    slack = max(0.0, smax - np.sqrt(2.0))
    return r, slack


# ---------------------------------------------------------------------------
# pairwise operator-norm tables


def _pair_table(a_cells, b_cells):
    """P[x, y] = |A_x B_y|_op for stacks of square matrices."""
    if a_cells.shape[1] == 2:
        return _backend.pair_opnorm(a_cells, b_cells)
    prod = np.einsum("xij,yjk->xyik", a_cells, b_cells)
    if a_cells.shape[1] == 1:
        return np.abs(prod[:, :, 0, 0])
    return np.linalg.norm(prod, ord=2, axis=(2, 3))


# ---------------------------------------------------------------------------
# Ap constants


def ap_constant(w: MatrixWeight, p, variant="roudenko"):
    """A Muckenhoupt-type constant of a matrix weight over dyadic cubes.

    variant="reducing" computes sup_Q of the operator norm of the product
    of the dual and primal reducing operators; "roudenko" the double
    integral-average form at 1 < p < inf, with the esssup forms at the
    endpoints ("a1" and "ainfty" name them directly).
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "a1" or (variant == "roudenko" and p == 1):
        return _ap_endpoint(w, 1.0)
    if variant == "ainfty" or (variant == "roudenko" and np.isinf(p)):
        return _ap_endpoint(w, np.inf)
    if variant == "roudenko":
        return _ap_roudenko(w, p)
    return _ap_reducing(w, p)


def _cube_iter(dom):
    for lev in range(dom.level + 1):
        for idx in range(dom.num_cubes(lev)):
            yield (lev, idx)


def _ap_endpoint(w, p):
    winv = w.inverse()
    if p == 1:
        table = _pair_table(winv.cells, w.cells)  # |W^{-1}(x) W(y)|
        variant = "a1"
    else:
        table = _pair_table(w.cells, winv.cells)  # |W(x) W^{-1}(y)|
        variant = "ainfty"
    best, best_cube = -np.inf, None
    for cube in _cube_iter(w.domain):
        sel = w.domain.cube_cells(*cube)
        val = float(np.max(np.mean(table[np.ix_(sel, sel)], axis=1)))
        if val > best:
            best, best_cube = val, cube
    if not np.isfinite(best):
        raise NotInAp(f"endpoint constant overflowed at p={p}")
    return ApReport(constant=best, variant=variant, p=float(p), achieving_cube=best_cube)


def _ap_roudenko(w, p):
    pp = conjugate(p)
    winv = w.inverse()
    table = _pair_table(w.cells, winv.cells)
    best, best_cube = -np.inf, None
    for cube in _cube_iter(w.domain):
        sel = w.domain.cube_cells(*cube)
        inner = np.mean(table[np.ix_(sel, sel)] ** pp, axis=1)
        val = float(np.mean(inner ** (p / pp)) ** (1.0 / p))
        if val > best:
            best, best_cube = val, cube
    if not np.isfinite(best):
        raise NotInAp("roudenko constant overflowed")
    return ApReport(constant=best, variant="roudenko", p=float(p), achieving_cube=best_cube)


def _ap_reducing(w, p):
    pp = conjugate(p)
    winv = w.inverse()
    best, best_cube, slack = -np.inf, None, 0.0
    for cube in _cube_iter(w.domain):
        r, s1 = reducing_operator(w, cube, p)
        rbar, s2 = reducing_operator(winv, cube, pp)
        val = opnorm(rbar @ r)
        slack = max(slack, s1, s2)
        if val > best:
            best, best_cube = val, cube
    if not np.isfinite(best):
        raise NotInAp("reducing constant overflowed")
    return ApReport(
        constant=best, variant="reducing", p=float(p), achieving_cube=best_cube, solver_slack=slack
    )


def duality_check(w, p):
    """Ratio of the reducing constant of W at p to that of W^{-1} at p'."""
    primal = ap_constant(w, p, "reducing")
    dual = ap_constant(w.inverse(), conjugate(p), "reducing")
    return primal.constant / dual.constant


# ---------------------------------------------------------------------------
# convex-set A1 constant


def a1k_constant(f: SetFunction):
    """Smallest C with every ancestor-cube average of F inside C F(x).

    Exact for polygon-valued data: the margin of avg ⊆ C F(x) is the max
    facet-support ratio.  Smooth cells are promoted to their grid polygons
    first, the same representation the averages are computed in, so a
    constant field gives exactly 1.
    """
    from .bodies import promote

    avgs = cube_averages(f)
    dom = f.domain
    targets = [promote(b) if b.dim == 2 else b for b in f.cells]
    best, best_cube = -np.inf, None
    for i in range(dom.num_cells):
        for cube in dom.ancestors(i):
            _, margin = contains_scaled(avgs[cube], targets[i], 1.0)
            if margin > best:
                best, best_cube = margin, cube
    return ApReport(constant=best, variant="a1k", p=1.0, achieving_cube=best_cube)


# ---------------------------------------------------------------------------
# scalar oracle


def scalar_oracle(w_cells, p, domain=None):
    """Classical dyadic Muckenhoupt constant of a scalar weight, in the
    normalization sup_Q (avg w^p)^{1/p} (avg w^{-p'})^{1/p'} (endpoint forms
    at p = 1 and p = inf).  Independent reference for diagonal embeddings.
    """
    from .grid import DyadicDomain

    w = np.asarray(w_cells, dtype=float)
    if np.any(w <= 0):
        raise ValueError("scalar weight must be strictly positive")
    if domain is None:
        j = int(np.log2(len(w)))
        domain = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=j)
    pp = conjugate(p)
    best = -np.inf
    for cube in _cube_iter(domain):
        sel = domain.cube_cells(*cube)
        ws = w[sel]
        if p == 1:
            val = np.mean(ws) * np.max(1.0 / ws)
        elif np.isinf(p):
            val = np.max(ws) * np.mean(1.0 / ws)
        else:
            val = np.mean(ws**p) ** (1.0 / p) * np.mean(ws ** (-pp)) ** (1.0 / pp)
        best = max(best, float(val))
    return best
