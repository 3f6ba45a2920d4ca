"""Maximum-volume inscribed ellipsoid (John ellipsoid) of a symmetric body.

The solver maximizes log det M over SPD matrices M subject to support
dominance |M n_i| <= c_i on a finite constraint set: polygon facets at d=2
(where the constraint set is exact) or grid directions for sampled bodies.
It follows the log-barrier central path with damped Newton steps; the
problem is tiny (d(d+1)/2 unknowns), so no external solver is used.
"""

from dataclasses import dataclass

import numpy as np

from .bodies import Ellipsoid, SupportSampled, SymPolygon, set_norm
from .errors import DegenerateBody, SolverFailure
from .spd import sym

ITERATION_CAP = 10_000
GRAD_TOL = 1e-10
BARRIER_FACTOR = 400.0


@dataclass
class JohnResult:
    m: np.ndarray  # SPD ellipsoid matrix, body = m * unit ball
    inner_ok: bool
    outer_ok: bool
    inner_slack: float
    outer_slack: float
    logdet: float
    iterations: int


def _sym_basis(d):
    basis = []
    for i in range(d):
        e = np.zeros((d, d))
        e[i, i] = 1.0
        basis.append(e)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d))
            e[i, j] = e[j, i] = 1.0
            basis.append(e)
    return np.array(basis)


def john_of_constraints(normals, offsets, tol=GRAD_TOL, cap=ITERATION_CAP):
    """Solve max log det M s.t. |M n_i| <= c_i, M SPD.

    Returns (M, iterations).  Normals need not be unit vectors.
    """
    n = np.asarray(normals, dtype=float)
    c = np.asarray(offsets, dtype=float)
    lens = np.linalg.norm(n, axis=1)
    keep = lens > 0
    n, c, lens = n[keep], c[keep], lens[keep]
    if np.any(c <= 0):
        raise DegenerateBody("inscribed ellipsoid needs strictly positive offsets")
    n = n / lens[:, None]
    c = c / lens
    d = n.shape[1]
    s0 = float(np.exp(np.mean(np.log(c))))  # scale normalization
    c = c / s0

    basis = _sym_basis(d)
    nb = len(basis)
    m = 0.9 * float(c.min()) * np.eye(d)
    x = np.array([m[i, i] for i in range(d)] + [0.0] * (nb - d))

    def assemble(xv):
        mm = np.zeros((d, d))
        for k in range(nb):
            mm += xv[k] * basis[k]
        return mm

    def feasible(mm):
        try:
            np.linalg.cholesky(mm)
        except np.linalg.LinAlgError:
            return False
        g = np.linalg.norm(mm @ n.T, axis=0)
        return bool(np.all(g < c))

    def value(mm, t):
        try:
            chol = np.linalg.cholesky(mm)
        except np.linalg.LinAlgError:
            return np.inf
        logdet = 2.0 * np.sum(np.log(np.diag(chol)))
        g = np.linalg.norm(mm @ n.T, axis=0)
        slack = c - g
        if np.any(slack <= 0):
            return np.inf
        return -t * logdet - np.sum(np.log(slack))

    iterations = 0
    t = 1.0
    m_constraints = len(c)
    t_final = m_constraints / 1e-12
    bn = np.einsum("kij,mj->kmi", basis, n)  # basis[k] @ n_i, shape (nb, m, d)
    while True:
        # Newton iterations at fixed barrier weight t.  The decrement scales
        # like sqrt(t) near the central path, hence the t-scaled tolerance.
        stage_tol = tol * np.sqrt(max(t, 1.0))
        for _ in range(60):
            iterations += 1
            if iterations > cap:
                raise SolverFailure("inscribed-ellipsoid solver exceeded iteration cap")
            mcur = assemble(x)
            minv = np.linalg.inv(mcur)
            gvec = mcur @ n.T  # (d, m)
            g = np.linalg.norm(gvec, axis=0)
            u = gvec / g[None, :]
            slack = c - g
            # Gradient.
            dg = np.einsum("kmi,im->km", bn, u)  # d g_i / d x_k
            grad = -t * np.einsum("kij,ji->k", basis, minv) + dg @ (1.0 / slack)
            # Hessian.
            mb = np.einsum("ij,kjl,lm->kim", minv, basis, minv)
            h_logdet = t * np.einsum("kim,lmi->kl", mb, basis.transpose(0, 2, 1))
            cross = np.einsum("kmi,lmi->klm", bn, bn)
            proj = np.einsum("km,lm->klm", dg, dg)
            h_g = (cross - proj) / g[None, None, :]
            hess = (
                h_logdet
                + np.einsum("klm,m->kl", h_g, 1.0 / slack)
                + np.einsum("km,lm,m->kl", dg, dg, 1.0 / slack**2)
            )
            try:
                step = np.linalg.solve(hess, -grad)
            except np.linalg.LinAlgError:
                step = -grad
            decrement = float(np.sqrt(max(step @ hess @ step, 0.0)))
            f0 = value(mcur, t)
            tau = 1.0
            gdotstep = grad @ step
            while tau > 1e-14:
                xn = x + tau * step
                fn = value(assemble(xn), t)
                if fn <= f0 + 0.25 * tau * gdotstep:
                    break
                tau *= 0.5
            else:
                break
            x = x + tau * step
            if decrement < stage_tol:
                break
        if t >= t_final:
            break
        t = min(t * BARRIER_FACTOR, t_final)

    m_opt = assemble(x)
    # Restore exact feasibility by a uniform shrink.
    g = np.linalg.norm(m_opt @ n.T, axis=0)
    worst = float(np.max(g / c))
    if worst > 1.0:
        m_opt = m_opt / worst
    return sym(m_opt) * s0, iterations


def john_ellipsoid(body, grid=None):
    """John ellipsoid of a bounded symmetric convex body.

    The result satisfies E ⊆ K exactly (after a uniform feasibility shrink)
    and K ⊆ sqrt(d) E up to the reported outer slack.
    """
    if isinstance(body, Ellipsoid):
        if not body.is_full():
            raise DegenerateBody("John ellipsoid needs a full-dimensional body")
        # The maximal inscribed ellipsoid of an ellipsoid is itself.
        d = body.dim
        sign, logdet = np.linalg.slogdet(body.m)
        return JohnResult(body.m.copy(), True, True, 0.0, 0.0, float(logdet), 0)
    if isinstance(body, SymPolygon):
        if body.rank < 2:
            raise DegenerateBody("John ellipsoid needs a full-dimensional body")
        normals, offsets = body.facets()
    elif isinstance(body, SupportSampled):
        if np.any(body.h <= 0):
            raise DegenerateBody("John ellipsoid needs a full-dimensional body")
        normals, offsets = body.grid.dirs, body.h
    else:
        raise TypeError(f"unsupported body {type(body)}")

    m_opt, iterations = john_of_constraints(normals, offsets)
    d = m_opt.shape[0]
    g = np.linalg.norm(m_opt @ (normals / np.linalg.norm(normals, axis=1)[:, None]).T, axis=0)
    cn = offsets / np.linalg.norm(normals, axis=1)
    inner_slack = max(0.0, float(np.max(g / cn)) - 1.0)
    outer_slack = max(0.0, set_norm(body, np.linalg.inv(m_opt)) / np.sqrt(d) - 1.0)
    sign, logdet = np.linalg.slogdet(m_opt)
    return JohnResult(
        m=m_opt,
        inner_ok=inner_slack <= 1e-12,
        outer_ok=outer_slack <= 1e-7,
        inner_slack=inner_slack,
        outer_slack=outer_slack,
        logdet=float(logdet),
        iterations=iterations,
    )
