"""SPD matrix calculus: square roots, powers, polar decomposition,
simultaneous congruence diagonalization, and the weighted geometric mean.

All eigendecompositions go through a cyclic Jacobi sweep with a fixed
visiting order so results are reproducible across platforms for the tiny
matrices (d <= 4) this library works with.
"""

import numpy as np

from .errors import NotSPD, Singular

SYM_TOL = 1e-12
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 64


def sym(a):
    a = np.asarray(a, dtype=float)
    return 0.5 * (a + a.T)


def check_spd(a, what="matrix"):
    """Validate symmetry and positive definiteness; return the symmetrized copy."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSPD(f"{what} is not square: shape {a.shape}")
    scale = np.abs(a).max()
    if not np.isfinite(a).all():
        raise NotSPD(f"{what} has non-finite entries")
    if np.abs(a - a.T).max() > SYM_TOL * max(scale, 1.0):
        raise NotSPD(f"{what} is not symmetric")
    s = sym(a)
    try:
        np.linalg.cholesky(s)
    except np.linalg.LinAlgError:
        raise NotSPD(f"{what} is not positive definite") from None
    return s


def jacobi_eigh(a):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (w, V) with ``a == V @ diag(w) @ V.T``, eigenvalues ascending.
    Deterministic sweep order (row-major upper triangle).
    """
    a = sym(a)
    d = a.shape[0]
    v = np.eye(d)
    m = a.copy()
    scale = max(np.abs(m).max(), 1.0)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = 0.0
        for p in range(d - 1):
            for q in range(p + 1, d):
                off = max(off, abs(m[p, q]))
                if abs(m[p, q]) <= JACOBI_TOL * scale:
                    continue
                # Classic two-sided rotation zeroing m[p, q].
                theta = 0.5 * (m[q, q] - m[p, p]) / m[p, q]
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(d)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                m = rot.T @ m @ rot
                v = v @ rot
        if off <= JACOBI_TOL * scale:
            break
    w = np.diag(m).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def spd_sqrt(a):
    """Symmetric positive definite square root via eigendecomposition."""
    a = check_spd(a, "spd_sqrt input")
    w, v = jacobi_eigh(a)
    if w.min() <= 0:
        raise NotSPD("spd_sqrt input has a non-positive eigenvalue")
    return sym(v @ np.diag(np.sqrt(w)) @ v.T)


def spd_power(a, t):
    """Real matrix power A^t of an SPD matrix (eigenvalue route)."""
    a = check_spd(a, "spd_power input")
    if t == 0:
        return np.eye(a.shape[0])
    if t == 1:
        return a
    w, v = jacobi_eigh(a)
    if w.min() <= 0:
        raise NotSPD("spd_power input has a non-positive eigenvalue")
    return sym(v @ np.diag(w**float(t)) @ v.T)


def spd_inv(a):
    a = check_spd(a, "inverse input")
    return sym(np.linalg.inv(a))


def polar_decompose(a):
    """Factor an invertible matrix as A = U W with U orthogonal, W SPD.

    W = (A^T A)^{1/2}, so |A v| = |W v| for every v.
    """
    a = np.asarray(a, dtype=float)
    d = a.shape[0]
    det = np.linalg.det(a)
    scale = max(np.abs(a).max(), 1.0)
    if abs(det) < 1e-13 * scale**d:
        raise Singular("polar decomposition needs an invertible matrix")
    w = spd_sqrt(sym(a.T @ a))
    u = a @ np.linalg.inv(w)
    return u, w


def sim_diag(a, b):
    """Simultaneous congruence diagonalization of two SPD matrices.

    Returns (S, D_a, D_b) with ``a == S.T @ D_a @ S`` and
    ``b == S.T @ D_b @ S``, where D_a is the identity and D_b is diagonal.
    """
    a = check_spd(a, "sim_diag first input")
    b = check_spd(b, "sim_diag second input")
    a_isqrt = spd_power(a, -0.5)
    w, u = jacobi_eigh(sym(a_isqrt @ b @ a_isqrt))
    s = u.T @ spd_sqrt(a)
    return s, np.eye(a.shape[0]), np.diag(w)


def geo_mean(a, b, t, check_tol=1e-10):
    """Weighted geometric mean A #_t B = A^{1/2} (A^{-1/2} B A^{-1/2})^t A^{1/2}.

    Also evaluates the congruence form S^T D_a^{1-t} D_b^t S and verifies the
    two routes agree to ``check_tol`` relative before returning.
    """
    a = check_spd(a, "geo_mean first input")
    b = check_spd(b, "geo_mean second input")
    if not 0.0 < t < 1.0:
        raise ValueError("geo_mean weight t must lie in (0, 1)")
    a_sqrt = spd_sqrt(a)
    a_isqrt = spd_power(a, -0.5)
    direct = sym(a_sqrt @ spd_power(sym(a_isqrt @ b @ a_isqrt), t) @ a_sqrt)

    s, _, d_b = sim_diag(a, b)
    db = np.diag(d_b)
    if db.min() <= 0:
        raise NotSPD("congruence route produced a non-positive diagonal")
    congruence = sym(s.T @ np.diag(db**t) @ s)

    scale = max(np.abs(direct).max(), np.abs(congruence).max())
    if np.abs(direct - congruence).max() > check_tol * scale:
        raise ArithmeticError(
            "geometric-mean routes disagree beyond tolerance: "
            f"{np.abs(direct - congruence).max():.3e} vs scale {scale:.3e}"
        )
    return direct


def opnorm(a):
    """Operator (spectral) norm; closed form at d <= 2, Jacobi otherwise."""
    a = np.asarray(a, dtype=float)
    if a.shape == (1, 1):
        return abs(a[0, 0])
    if a.shape == (2, 2):
        f = float(np.sum(a * a))
        det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        disc = max(f * f - 4.0 * det * det, 0.0)
        return float(np.sqrt(0.5 * (f + np.sqrt(disc))))
    w, _ = jacobi_eigh(sym(a.T @ a))
    return float(np.sqrt(max(w.max(), 0.0)))
