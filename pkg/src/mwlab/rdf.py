"""The generalized iteration algorithm S G = sum_k 2^{-k} B^{-k} T^k G,
its scalar realizations for the factorization operators, constructive
Jones-type factorization, reverse factorization through the SPD geometric
mean, and the single-sided rescaling used by sharp extrapolation.

The series bound B is a certified empirical bound, re-validated at every
iteration step and escalated on violation; the iteration guarantees then
hold with 2B in place of the unknown true operator norm.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _backend
from .ap import ApReport, ap_constant, conjugate
from .directions import canonical_grid
from .errors import (
    BoundViolation,
    ExponentOutOfRange,
    NonMonotoneOperator,
    NotInAp,
)
from .grid import MatrixWeight, ScalarField, SetFunction
from .maximal import _mink_average, lpk_norm
from .spd import spd_power

KERNEL_DIRS = 128  # half-circle directions used by the scalar realizations


@dataclass
class IterationConfig:
    bound: float
    k_max: int = 30
    p: float = 2.0
    safety: float = 1.1
    max_escalations: int = 5


@dataclass
class FactorizationResult:
    w0: MatrixWeight
    w1: MatrixWeight
    rbar: ScalarField
    report_a1: ApReport
    report_ainfty: ApReport
    product_residual: float
    bound: float
    p: float
    seed_norm: float


def _half_dirs(n=KERNEL_DIRS):
    full = canonical_grid(2, 2 * n).dirs
    return full[:n]


# ---------------------------------------------------------------------------
# scalar realizations of the maximal pipelines


def ellipsoid_maximal_norm(c, shapes, evals, dirs=None):
    """max over dyadic ancestors Q and grid directions w of the Q-average
    of c(y) |shapes(y) evals(x) w|; linear and monotone in c, hence the
    scalar operators built from it are exactly sublinear."""
    dirs = _half_dirs() if dirs is None else dirs
    return _backend.ellip_max_norm(np.asarray(c, dtype=float), shapes, evals, dirs)


def op_T1(w: MatrixWeight, p):
    """Scalar realization r -> |W(x) M(r^{p'} W^{-1} B)(x)|^{1/p'}."""
    pp = conjugate(p)
    winv = w.inverse()

    def t1(r):
        return ellipsoid_maximal_norm(np.asarray(r) ** pp, winv.cells, w.cells) ** (1.0 / pp)

    return t1


def op_T2(w: MatrixWeight, p):
    """Scalar realization r -> |W^{-1}(x) M(r^{p} W B)(x)|^{1/p}."""
    winv = w.inverse()

    def t2(r):
        return ellipsoid_maximal_norm(np.asarray(r) ** p, w.cells, winv.cells) ** (1.0 / p)

    return t2


def op_PW(w: MatrixWeight):
    """Scalar realization of N_W M on fields x -> r(x) W^{-1}(x) B."""
    winv = w.inverse()

    def pw(r):
        return ellipsoid_maximal_norm(r, winv.cells, w.cells)

    return pw


def op_PIprime(w: MatrixWeight):
    """Scalar realization of N_I (W^{-1} M(W .)) on ball fields r B."""
    winv = w.inverse()

    def pi(r):
        return ellipsoid_maximal_norm(r, w.cells, winv.cells)

    return pi


# ---------------------------------------------------------------------------
# certified bounds and the iteration


def certify_bound(t_op, norm_fn, probe_gen, probes=32, safety=1.1):
    """B = safety * max over random probes of norm(T g) / norm(g)."""
    if probes < 1:
        raise ValueError("need at least one probe")
    worst = 0.0
    for _ in range(probes):
        g = probe_gen()
        ng = norm_fn(g)
        if ng <= 0:
            continue
        worst = max(worst, norm_fn(t_op(g)) / ng)
    return safety * worst


def _validate_monotone_scalar(t_op, probe):
    r1 = np.asarray(probe, dtype=float)
    r2 = 1.5 * r1
    a, b = t_op(r1), t_op(r2)
    if np.any(a > b * (1 + 1e-9) + 1e-12 * np.max(np.abs(b))):
        raise NonMonotoneOperator("operator failed the scalar monotonicity probe")


def iterate_scalar(t_op, r0, cfg: IterationConfig, norm_fn, validate=True):
    """Truncated series sum_{k<k_max} 2^{-k} B^{-k} T^k r on scalar fields.

    The per-step bound norm(T^k r) <= B norm(T^{k-1} r) is validated; on
    violation B is escalated by the safety factor and the sum restarted.
    """
    r0 = np.asarray(r0, dtype=float)
    if validate:
        _validate_monotone_scalar(t_op, r0)
    b = cfg.bound
    if b == 0.0:  # the zero operator: the series is its own first term
        return r0.copy(), 0.0
    for _ in range(cfg.max_escalations + 1):
        acc = r0.copy()
        term = r0.copy()
        prev_norm = norm_fn(term)
        ok = True
        for k in range(1, cfg.k_max):
            term = t_op(term)
            cur_norm = norm_fn(term)
            if cur_norm > b * prev_norm * (1.0 + 1e-12) and cur_norm > 1e-300:
                b *= cfg.safety
                ok = False
                break
            acc = acc + term * (0.5 / b) ** k
            prev_norm = cur_norm
        if ok:
            return acc, b
    raise BoundViolation("per-step bound violated beyond the escalation budget")


def iterate(t_op, g: SetFunction, cfg: IterationConfig, norm_fn=None, validate=True):
    """Truncated iteration on set functions with exact Minkowski sums.

    ``t_op`` maps a SetFunction to a SetFunction and must be sublinear and
    monotone for the output guarantees to hold; monotonicity is
    spot-validated on a scaled probe.
    """
    if norm_fn is None:
        norm_fn = lambda f: lpk_norm(f, None, cfg.p)
    from .bodies import scale as scale_body

    if validate:
        doubled = SetFunction(g.domain, [scale_body(b, 2.0) for b in g.cells])
        ta, tb = t_op(g), t_op(doubled)
        dirs = canonical_grid(2).dirs[:8] if g.d == 2 else None
        for i in range(g.domain.num_cells):
            if dirs is not None:
                ha = ta.cells[i].supports(dirs)
                hb = tb.cells[i].supports(dirs)
                scl = max(np.abs(hb).max(), 1.0)
                if np.any(ha > hb + 1e-9 * scl):
                    raise NonMonotoneOperator("operator failed the set monotonicity probe")
    b = cfg.bound
    if b == 0.0:
        return g, 0.0
    for _ in range(cfg.max_escalations + 1):
        acc = g
        term = g
        prev_norm = norm_fn(term)
        ok = True
        for k in range(1, cfg.k_max):
            term = t_op(term)
            cur_norm = norm_fn(term)
            if cur_norm > b * prev_norm * (1.0 + 1e-12) and cur_norm > 1e-300:
                b *= cfg.safety
                ok = False
                break
            coeff = (0.5 / b) ** k
            acc = SetFunction(
                g.domain,
                [
                    _mink_average([acc.cells[i], term.cells[i]], [1.0, coeff])
                    for i in range(g.domain.num_cells)
                ],
            )
            prev_norm = cur_norm
        if ok:
            return acc, b
    raise BoundViolation("per-step bound violated beyond the escalation budget")


# ---------------------------------------------------------------------------
# factorization


def _lq_norm(r, domain, q):
    mu = domain.cell_measure
    return float(np.sum(np.asarray(r) ** q * mu) ** (1.0 / q))


def factorize(w: MatrixWeight, p, seed=None, cfg: Optional[IterationConfig] = None, rng=None):
    """Split W in A_p into W0 = rbar^p W in A_1 and W1 = rbar^{-p'} W in
    A_infty with W = W0^{1/p} W1^{1/p'} exactly (cellwise commuting scalar
    multiples); rbar comes from iterating T1 + T2 on a ball-valued seed."""
    if not 1.0 < p < np.inf:
        raise ExponentOutOfRange("factorization needs 1 < p < inf")
    check = ap_constant(w, p, "roudenko")
    if not np.isfinite(check.constant):
        raise NotInAp("weight has no finite A_p constant")
    pp = conjugate(p)
    q = p * pp
    dom = w.domain
    t1, t2 = op_T1(w, p), op_T2(w, p)
    t_op = lambda r: t1(r) + t2(r)
    norm_fn = lambda r: _lq_norm(r, dom, q)

    if seed is None:
        seed = np.full(dom.num_cells, dom.total_measure ** (-1.0 / q))
    else:
        seed = np.asarray(seed, dtype=float)
        if np.any(seed <= 0):
            raise ValueError("seed must be strictly positive")
        seed = seed / _lq_norm(seed, dom, q)

    rng = np.random.default_rng(0) if rng is None else rng
    probe_gen = lambda: np.exp(rng.normal(size=dom.num_cells))
    base_cfg = cfg if cfg is not None else IterationConfig(bound=0.0, p=q)
    bound = certify_bound(t_op, norm_fn, probe_gen, probes=32, safety=base_cfg.safety)
    run_cfg = IterationConfig(
        bound=bound,
        k_max=base_cfg.k_max,
        p=q,
        safety=base_cfg.safety,
        max_escalations=base_cfg.max_escalations,
    )
    rbar, bound = iterate_scalar(t_op, seed, run_cfg, norm_fn)

    w0 = w.scalar_multiply(rbar**p)
    w1 = w.scalar_multiply(rbar ** (-pp))
    rep0 = ap_constant(w0, 1.0, "a1")
    rep1 = ap_constant(w1, np.inf, "ainfty")
    prod = np.array(
        [spd_power(w0.cells[i], 1.0 / p) @ spd_power(w1.cells[i], 1.0 / pp) for i in range(dom.num_cells)]
    )
    residual = float(
        np.max(np.abs(prod - w.cells)) / max(np.max(np.abs(w.cells)), 1e-300)
    )
    return FactorizationResult(
        w0=w0,
        w1=w1,
        rbar=ScalarField(dom, rbar),
        report_a1=rep0,
        report_ainfty=rep1,
        product_residual=residual,
        bound=bound,
        p=float(p),
        seed_norm=float(_lq_norm(seed, dom, q)),
    )


# ---------------------------------------------------------------------------
# reverse factorization and the single-sided rescale


def reverse_factorize(w0: MatrixWeight, w1: MatrixWeight, q0, q1, t):
    """Cellwise ((W0)^2 #_t (W1)^2)^{1/2}; returns the weight and a report
    with the measured constant ratio against [W0]^{1-t} [W1]^t."""
    from .spd import geo_mean, spd_sqrt

    if w0.domain != w1.domain:
        from .errors import DomainMismatch

        raise DomainMismatch("weights live on different domains")
    if not 0.0 < t < 1.0:
        raise ExponentOutOfRange("t must lie in (0, 1)")
    inv_q = (1.0 - t) * (0.0 if np.isinf(q0) else 1.0 / q0) + t * (
        0.0 if np.isinf(q1) else 1.0 / q1
    )
    q = np.inf if inv_q == 0 else 1.0 / inv_q
    cells = np.array(
        [
            spd_sqrt(geo_mean(w0.cells[i] @ w0.cells[i], w1.cells[i] @ w1.cells[i], t))
            for i in range(w0.domain.num_cells)
        ]
    )
    wbar = MatrixWeight(w0.domain, cells)
    rep = ap_constant(wbar, q, "roudenko")
    c0 = ap_constant(w0, q0, "roudenko").constant
    c1 = ap_constant(w1, q1, "roudenko").constant
    ratio = rep.constant / (c0 ** (1.0 - t) * c1**t)
    report = {
        "q": q,
        "constant": rep.constant,
        "input_constants": (c0, c1),
        "bound_ratio": ratio,
    }
    return wbar, report


def duo_rescale(w: MatrixWeight, p, field, p0, branch):
    """Power-product rescaling along a scalar multiple of W.

    branch="up" (p0 > p):  Wbar = W^{p/p0} (s W)^{1 - p/p0} = s^{1-p/p0} W,
    branch="down" (p0 < p): Wbar = (r W)^{1-p'/p0'} W^{p'/p0'} = r^{1-p'/p0'} W,
    where ``field`` is s (up) or r (down).  The commuting scalar-multiple
    structure makes the cellwise power product exact.
    """
    r = np.asarray(field, dtype=float)
    if np.any(r <= 0):
        raise ValueError("rescaling field must be strictly positive")
    if branch == "up":
        if not p < p0:
            raise ExponentOutOfRange("up branch needs p0 > p")
        expo = 1.0 - (0.0 if np.isinf(p0) else p / p0)
    elif branch == "down":
        if not 1.0 <= p0 < p:
            raise ExponentOutOfRange("down branch needs 1 <= p0 < p")
        pp, pp0 = conjugate(p), conjugate(p0)
        expo = 1.0 - (0.0 if np.isinf(pp0) else pp / pp0)
    else:
        raise ValueError("branch must be 'up' or 'down'")
    wbar = w.scalar_multiply(r**expo)
    rep = ap_constant(wbar, p0, "roudenko")
    return wbar, rep
