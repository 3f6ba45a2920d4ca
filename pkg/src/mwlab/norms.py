"""Norm evaluators and norm calculus: duals, geometric means of norms, and
the double dual of a geometric mean."""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .bodies import gauge, polar
from .directions import canonical_grid
from .errors import DegenerateNorm
from .spd import check_spd, geo_mean, spd_sqrt

GOLDEN_STEPS = 20


@dataclass(frozen=True)
class NormEvaluator:
    """A positively homogeneous evaluator v -> rho(v).

    ``matrix`` is set when rho(v) = |W v| for an SPD W, which unlocks exact
    shortcuts (duality, reduction).  ``is_norm`` is False for homogeneous
    evaluators that may fail the triangle inequality (geometric means).
    """

    fn: Callable[[np.ndarray], float]
    dim: int
    matrix: Optional[np.ndarray] = None
    is_norm: bool = True
    label: str = ""
    batch_fn: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)

    def __call__(self, v):
        return float(self.fn(np.asarray(v, dtype=float)))

    def batch(self, vs):
        vs = np.asarray(vs, dtype=float)
        if self.batch_fn is not None:
            return np.asarray(self.batch_fn(vs), dtype=float)
        return np.array([self.fn(v) for v in vs])


def matrix_norm(w):
    """rho_W(v) = |W v| for SPD W."""
    w = check_spd(w, "matrix norm weight")
    return NormEvaluator(
        fn=lambda v: float(np.linalg.norm(w @ v)),
        dim=w.shape[0],
        matrix=w,
        label="matrix",
        batch_fn=lambda vs: np.linalg.norm(vs @ w.T, axis=1),
    )


def body_gauge_norm(body, grid=None):
    """The norm whose unit ball is the polar of ``body`` (v -> h_body(v))."""
    pol = polar(body, grid) if not hasattr(body, "grid") else polar(body)
    return NormEvaluator(
        fn=lambda v: gauge(pol, v),
        dim=body.dim,
        label="body-gauge",
    )


def dual_norm(rho: NormEvaluator, v, grid=None):
    """Dual norm rho*(v) = sup_w |<v, w>| / rho(w).

    Exact for matrix-backed norms (rho_W* = rho_{W^{-1}}); otherwise a grid
    maximization polished by golden-section refinement at d=2.
    """
    v = np.asarray(v, dtype=float)
    if rho.matrix is not None:
        return float(np.linalg.norm(np.linalg.solve(rho.matrix, v)))
    g = grid if grid is not None else canonical_grid(rho.dim)
    denoms = rho.batch(g.dirs)
    if denoms.min() <= 1e-14 * max(denoms.max(), 1e-300):
        raise DegenerateNorm("norm vanishes on a probe direction")
    vals = np.abs(g.dirs @ v) / denoms
    best = int(np.argmax(vals))
    if rho.dim != 2:
        return float(vals[best])
    # Golden-section polish of the angle around the best grid direction.
    theta0 = np.arctan2(g.dirs[best, 1], g.dirs[best, 0])
    width = 2.0 * np.pi / len(g)

    def val(theta):
        w = np.array([np.cos(theta), np.sin(theta)])
        return abs(w @ v) / rho(w)

    lo, hi = theta0 - width, theta0 + width
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c1 = b - invphi * (b - a)
    c2 = a + invphi * (b - a)
    f1, f2 = val(c1), val(c2)
    for _ in range(GOLDEN_STEPS):
        if f1 < f2:
            a, c1, f1 = c1, c2, f2
            c2 = a + invphi * (b - a)
            f2 = val(c2)
        else:
            b, c2, f2 = c2, c1, f1
            c1 = b - invphi * (b - a)
            f1 = val(c1)
    return float(max(vals[best], f1, f2))


def dual_norm_evaluator(rho: NormEvaluator, grid=None):
    if rho.matrix is not None:
        return matrix_norm(np.linalg.inv(rho.matrix))
    return NormEvaluator(
        fn=lambda v: dual_norm(rho, v, grid),
        dim=rho.dim,
        label=f"dual({rho.label})",
    )


def geo_mean_norm(rho0: NormEvaluator, rho1: NormEvaluator, t):
    """Pointwise geometric mean rho0^{1-t} rho1^t.

    Homogeneous but in general not a norm; flagged via ``is_norm=False``.
    """
    if not 0.0 < t < 1.0:
        raise ValueError("geometric-mean weight t must lie in (0, 1)")

    def fn(v):
        return rho0(v) ** (1.0 - t) * rho1(v) ** t

    return NormEvaluator(
        fn=fn,
        dim=rho0.dim,
        is_norm=False,
        label="geo-mean",
        batch_fn=lambda vs: rho0.batch(vs) ** (1.0 - t) * rho1.batch(vs) ** t,
    )


def double_dual_geo(a, b, t, probes=64, grid=None):
    """Matrix route vs numeric route for the double dual of the geometric
    mean of |A^{1/2} .| and |B^{1/2} .|.

    Returns ((A #_t B)^{1/2}, (lo, hi)) where (lo, hi) is the observed range
    of the ratio (numeric double dual) / (matrix route) over probe
    directions.  The equivalence constant is dimension-dependent and is
    reported, never asserted.
    """
    a = check_spd(a, "double_dual_geo first input")
    b = check_spd(b, "double_dual_geo second input")
    r = spd_sqrt(geo_mean(a, b, t))
    d = a.shape[0]
    g = grid if grid is not None else canonical_grid(d)
    rho_t = geo_mean_norm(matrix_norm(spd_sqrt(a)), matrix_norm(spd_sqrt(b)), t)
    rho_t_star = NormEvaluator(
        fn=lambda v: dual_norm(rho_t, v, g), dim=d, label="geo-mean-dual"
    )
    probe_dirs = canonical_grid(d, probes).dirs if d == 2 else g.dirs[:probes]
    ratios = []
    for v in probe_dirs:
        num = dual_norm(rho_t_star, v, g)
        den = float(np.linalg.norm(r @ v))
        ratios.append(num / den)
    return r, (float(np.min(ratios)), float(np.max(ratios)))
