"""Arithmetic of bounded, symmetric, convex bodies.

Representations:

* ``SymPolygon`` -- exact symmetric polygon at d=2 (vertices may degenerate
  to a segment or the origin); all planar arithmetic is exact vertex
  arithmetic.
* ``Ellipsoid`` -- the image m * closed-unit-ball of a symmetric PSD matrix,
  any dimension.
* ``SupportSampled`` -- outer polyhedron cut out by per-direction support
  values on a canonical grid, used at d >= 3 where exact polytope
  arithmetic is out of scope.

Operations whose exact result leaves a representation class (for example a
Minkowski sum of two ellipses) are promoted to the polygon induced by the
exact support values on the canonical direction grid; supports on grid
directions are preserved exactly by the promotion.
"""

import numpy as np

from .directions import DirectionGrid, canonical_grid
from .errors import DegenerateBody, DimensionMismatch
from .spd import jacobi_eigh, opnorm, sym

_EPS = 1e-12


class ConvexBody:
    """Base class; concrete bodies define dim and the support oracle."""

    dim = None

    def support(self, u):
        raise NotImplementedError

    def supports(self, dirs):
        """Vectorized support values for an (N, d) direction array."""
        return np.array([self.support(u) for u in np.asarray(dirs, dtype=float)])


# ---------------------------------------------------------------------------
# planar convex hull helpers


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def hull_2d(points, tol=None):
    """Convex hull of a 2d point cloud (monotone chain), CCW, no collinear
    vertices.  Returns (m, 2) array; m may be 1 (point) or 2 (segment)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    scale = max(np.abs(pts).max(), 1.0)
    if tol is None:
        tol = _EPS * scale * scale
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.any(np.abs(np.diff(pts, axis=0)) > _EPS * scale, axis=1)
    pts = pts[keep]
    if len(pts) == 1:
        return pts
    if len(pts) == 2:
        return pts

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= tol:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    if len(hull) < 3:
        # All points collinear: extreme pair only.
        d = pts[-1] - pts[0]
        proj = pts @ d
        return np.array([pts[np.argmin(proj)], pts[np.argmax(proj)]])
    return hull


class SymPolygon(ConvexBody):
    """Symmetric convex polygon at d=2 in canonical form.

    Canonical form: CCW vertex order, no redundant vertices, vertex list
    closed under exact negation, starting at the lexicographically smallest
    vertex.  Degenerate ranks are allowed: a single origin vertex (rank 0)
    or an antipodal vertex pair (segment, rank 1).
    """

    dim = 2

    def __init__(self, points, symmetrize=True):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        if symmetrize:
            pts = np.vstack([pts, -pts])
        verts = hull_2d(pts)
        if len(verts) > 2 and len(verts) % 2 and not symmetrize:
            # Rounding in upstream arithmetic can break exact negation
            # closure; the exactly symmetrized cloud restores mirrored
            # hull decisions.
            verts = hull_2d(np.vstack([pts, -pts]))
        if len(verts) == 1 or np.abs(verts).max() <= _EPS:
            verts = np.zeros((1, 2))
        elif len(verts) == 2:
            v = 0.5 * (verts[1] - verts[0])  # enforce exact +/- pair
            verts = np.array([v, -v]) if v[0] > 0 or (v[0] == 0 and v[1] > 0) else np.array([-v, v])
        else:
            m = len(verts)
            if m % 2:
                raise DegenerateBody("symmetric hull produced an odd vertex count")
            start = np.lexsort((verts[:, 1], verts[:, 0]))[0]
            verts = np.roll(verts, -start, axis=0)
            verts[m // 2 :] = -verts[: m // 2]  # exact negation closure
        verts.setflags(write=False)
        self.verts = verts

    @property
    def rank(self):
        if len(self.verts) == 1:
            return 0
        if len(self.verts) == 2:
            return 1
        return 2

    def facets(self):
        """Outward facet normals and offsets (n_i, c_i) with <x, n_i> <= c_i."""
        if self.rank < 2:
            raise DegenerateBody("facets need a full-dimensional polygon")
        v = self.verts
        e = np.roll(v, -1, axis=0) - v
        n = np.column_stack([e[:, 1], -e[:, 0]])
        c = np.sum(n * v, axis=1)
        return n, c

    def support(self, u):
        return float(np.max(self.verts @ np.asarray(u, dtype=float)))

    def supports(self, dirs):
        return np.max(self.verts @ np.asarray(dirs, dtype=float).T, axis=0)

    def __repr__(self):
        return f"SymPolygon({len(self.verts)} vertices)"


class Ellipsoid(ConvexBody):
    """The set m * closed-unit-ball for a symmetric PSD matrix m."""

    def __init__(self, m):
        m = sym(m)
        w, _ = jacobi_eigh(m)
        if w.min() < -1e-10 * max(abs(w).max(), 1.0):
            raise DegenerateBody("ellipsoid matrix must be positive semidefinite")
        m.setflags(write=False)
        self.m = m
        self.dim = m.shape[0]
        self._min_eig = float(w.min())

    def is_full(self):
        return self._min_eig > 1e-12 * max(np.abs(self.m).max(), 1.0)

    def support(self, u):
        return float(np.linalg.norm(self.m @ np.asarray(u, dtype=float)))

    def supports(self, dirs):
        return np.linalg.norm(np.asarray(dirs, dtype=float) @ self.m.T, axis=1)

    def __repr__(self):
        return f"Ellipsoid(d={self.dim})"


class SupportSampled(ConvexBody):
    """Outer polyhedron from support samples on a direction grid (d >= 3).

    Semantics: intersection of the half-spaces <x, u_i> <= h_i.  On
    construction the values are replaced by the support function of that
    polyhedron so every stored value is attained.
    """

    def __init__(self, grid: DirectionGrid, h, canonicalize=True):
        h = np.asarray(h, dtype=float).copy()
        if len(h) != len(grid):
            raise DimensionMismatch("support vector length does not match grid")
        if np.any(h < 0):
            raise DegenerateBody("support values of a symmetric body are nonnegative")
        self.grid = grid
        self.dim = grid.dim
        n = len(grid)
        half = n // 2
        h = np.minimum(h, h[np.r_[half:n, 0:half]])  # exact symmetry h(u) = h(-u)
        self.h = h
        if canonicalize:
            self._canonicalize()
        self.h.setflags(write=False)

    def _canonicalize(self):
        # Support of the induced polyhedron in each grid direction (an LP).
        from scipy.optimize import linprog

        dirs = self.grid.dirs
        out = np.empty_like(self.h)
        bounds = [(None, None)] * self.dim
        for i, u in enumerate(dirs):
            res = linprog(-u, A_ub=dirs, b_ub=self.h, bounds=bounds, method="highs")
            if not res.success:
                raise DegenerateBody("support canonicalization LP failed")
            out[i] = -res.fun
        half = len(dirs) // 2
        n = len(dirs)
        self.h = np.minimum(out, out[np.r_[half:n, 0:half]])

    def support(self, u):
        from scipy.optimize import linprog

        res = linprog(
            -np.asarray(u, dtype=float),
            A_ub=self.grid.dirs,
            b_ub=self.h,
            bounds=[(None, None)] * self.dim,
            method="highs",
        )
        if not res.success:
            raise DegenerateBody("support LP failed")
        return float(-res.fun)

    def __repr__(self):
        return f"SupportSampled(d={self.dim}, N={len(self.grid)})"


# ---------------------------------------------------------------------------
# constructors and promotion


def unit_ball(d):
    return Ellipsoid(np.eye(d))


def segment(v):
    """The symmetric segment conv{v, -v} at d=2 (or the origin)."""
    v = np.asarray(v, dtype=float)
    return SymPolygon(v.reshape(1, 2))


def polygon_from_supports(dirs, h):
    """Exact polygon cut out by half-planes <x, u_i> <= h_i at d=2.

    Uses polar duality: the intersection of the half-planes is the polar of
    conv{u_i / h_i}, which is computed by exact facet-vertex duality.
    """
    dirs = np.asarray(dirs, dtype=float)
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0):
        raise DegenerateBody("half-plane promotion needs strictly positive supports")
    dual = SymPolygon(dirs / h[:, None], symmetrize=False)
    return polar(dual)


def promote(body, grid=None):
    """Represent a d=2 body as a SymPolygon.

    Polygons pass through; ellipses become the outer polygon induced by
    their exact supports on the grid (support values on grid directions are
    preserved exactly).
    """
    if isinstance(body, SymPolygon):
        return body
    if body.dim != 2:
        raise DimensionMismatch("promotion to polygon is a d=2 operation")
    grid = grid if grid is not None else canonical_grid(2)
    if isinstance(body, Ellipsoid) and not body.is_full():
        # Rank-deficient ellipse: segment along the positive eigenvector.
        w, v = jacobi_eigh(body.m)
        if w.max() <= _EPS * max(np.abs(body.m).max(), 1.0):
            return SymPolygon(np.zeros((1, 2)))
        return segment(w.max() * v[:, np.argmax(w)])
    h = body.supports(grid.dirs)
    return polygon_from_supports(grid.dirs, h)


# ---------------------------------------------------------------------------
# operations


def support(body, u):
    """h_K(u) = sup over K of <u, .> (u need not be a unit vector)."""
    return body.support(u)


def gauge(body, v):
    """Minkowski functional inf{r > 0 : v / r in K}; gauge(K, 0) = 0."""
    v = np.asarray(v, dtype=float)
    if isinstance(body, Ellipsoid):
        if not body.is_full():
            return _gauge_degenerate_ellipsoid(body, v)
        return float(np.linalg.norm(np.linalg.solve(body.m, v)))
    if isinstance(body, SymPolygon):
        if body.rank == 2:
            n, c = body.facets()
            return float(np.max((n @ v) / c))
        return _gauge_degenerate_polygon(body, v)
    if isinstance(body, SupportSampled):
        ratios = (body.grid.dirs @ v) / body.h
        return float(np.max(ratios))
    raise TypeError(f"unsupported body {type(body)}")


def _gauge_degenerate_polygon(body, v):
    scale = max(np.abs(body.verts).max(), 1.0)
    if np.linalg.norm(v) <= _EPS * scale:
        return 0.0
    if body.rank == 0:
        raise DegenerateBody("gauge of {0} is infinite off the origin")
    w = body.verts[0]
    cross = w[0] * v[1] - w[1] * v[0]
    if abs(cross) > _EPS * scale * np.linalg.norm(v):
        raise DegenerateBody("vector lies outside the span of a segment")
    t = (v @ w) / (w @ w)
    return abs(t)


def _gauge_degenerate_ellipsoid(body, v):
    w, vecs = jacobi_eigh(body.m)
    scale = max(np.abs(body.m).max(), 1.0)
    coef = vecs.T @ v
    live = w > 1e-12 * scale
    if np.linalg.norm(coef[~live]) > _EPS * max(np.linalg.norm(v), 1.0):
        raise DegenerateBody("vector lies outside the span of a degenerate ellipsoid")
    r = coef[live] / w[live]
    return float(np.linalg.norm(r))


def scale(body, alpha):
    """|alpha| * K (symmetric bodies absorb the sign)."""
    a = abs(float(alpha))
    if isinstance(body, SymPolygon):
        return SymPolygon(a * body.verts, symmetrize=False)
    if isinstance(body, Ellipsoid):
        return Ellipsoid(a * body.m)
    if isinstance(body, SupportSampled):
        return SupportSampled(body.grid, a * body.h, canonicalize=False)
    raise TypeError(f"unsupported body {type(body)}")


def _check_same_dim(*bodies):
    dims = {b.dim for b in bodies}
    if len(dims) != 1:
        raise DimensionMismatch(f"bodies live in different dimensions: {dims}")
    return dims.pop()


def minkowski_sum(k1, k2, grid=None):
    """Minkowski sum; support functions add exactly on grid directions."""
    d = _check_same_dim(k1, k2)
    if d == 2:
        p1, p2 = promote(k1, grid), promote(k2, grid)
        return _poly_sum(p1, p2)
    if isinstance(k1, Ellipsoid) and isinstance(k2, Ellipsoid):
        g = grid if grid is not None else canonical_grid(d)
        return SupportSampled(g, k1.supports(g.dirs) + k2.supports(g.dirs))
    if isinstance(k1, SupportSampled) and isinstance(k2, SupportSampled):
        if k1.grid is not k2.grid and len(k1.grid) != len(k2.grid):
            raise DimensionMismatch("support grids differ")
        return SupportSampled(k1.grid, k1.h + k2.h)
    g = k1.grid if isinstance(k1, SupportSampled) else k2.grid
    return SupportSampled(g, k1.supports(g.dirs) + k2.supports(g.dirs))


def _poly_sum(p1, p2):
    """Exact Minkowski sum of two symmetric polygons (edge merge)."""
    v1, v2 = p1.verts, p2.verts
    if len(v1) == 1:
        return SymPolygon(v2 + v1[0], symmetrize=False)
    if len(v2) == 1:
        return SymPolygon(v1 + v2[0], symmetrize=False)
    if len(v1) == 2 or len(v2) == 2:
        pts = (v1[:, None, :] + v2[None, :, :]).reshape(-1, 2)
        return SymPolygon(pts, symmetrize=False)

    def edges_from(v):
        lo = np.lexsort((v[:, 0], v[:, 1]))[0]  # lowest vertex (y, then x)
        v = np.roll(v, -lo, axis=0)
        return v[0], np.roll(v, -1, axis=0) - v

    s1, e1 = edges_from(v1)
    s2, e2 = edges_from(v2)
    edges = np.vstack([e1, e2])
    ang = np.arctan2(edges[:, 1], edges[:, 0])
    ang = np.mod(ang, 2.0 * np.pi)
    order = np.argsort(ang, kind="stable")
    path = np.vstack([s1 + s2, s1 + s2 + np.cumsum(edges[order], axis=0)[:-1]])
    return SymPolygon(path, symmetrize=False)


def hull_union(bodies, grid=None):
    """Closed convex hull of a union; supports are the pointwise max."""
    if not bodies:
        raise ValueError("hull_union needs a nonempty list")
    d = _check_same_dim(*bodies)
    if d == 2:
        polys = [promote(b, grid) for b in bodies]
        pts = np.vstack([p.verts for p in polys])
        return SymPolygon(pts, symmetrize=False)
    g = grid
    for b in bodies:
        if isinstance(b, SupportSampled):
            g = b.grid
            break
    if g is None:
        g = canonical_grid(d)
    h = np.max(np.vstack([b.supports(g.dirs) for b in bodies]), axis=0)
    return SupportSampled(g, h)


def polar(body, grid=None):
    """Polar set K°; an exact involution on full-dimensional planar bodies."""
    if isinstance(body, Ellipsoid):
        if not body.is_full():
            raise DegenerateBody("polar of a lower-dimensional ellipsoid is unbounded")
        return Ellipsoid(np.linalg.inv(body.m))
    if isinstance(body, SymPolygon):
        if body.rank < 2:
            raise DegenerateBody("polar of a lower-dimensional polygon is unbounded")
        n, c = body.facets()
        return SymPolygon(n / c[:, None], symmetrize=False)
    if isinstance(body, SupportSampled):
        if np.any(body.h <= 0):
            raise DegenerateBody("polar of a lower-dimensional body is unbounded")
        dirs = body.grid.dirs
        pts = dirs / body.h[:, None]  # vertices of the polar polytope
        hp = np.max(dirs @ pts.T, axis=1)
        return SupportSampled(body.grid, hp, canonicalize=False)
    raise TypeError(f"unsupported body {type(body)}")


def set_norm(body, w=None):
    """sup over K of |W v| (Euclidean norm when W is None)."""
    if isinstance(body, SymPolygon):
        v = body.verts if w is None else body.verts @ np.asarray(w, dtype=float).T
        return float(np.max(np.linalg.norm(v, axis=1)))
    if isinstance(body, Ellipsoid):
        m = body.m if w is None else np.asarray(w, dtype=float) @ body.m
        return opnorm(m)
    if isinstance(body, SupportSampled):
        # Lower bound over grid directions of the transformed polyhedron.
        dirs = body.grid.dirs
        if w is None:
            pts = dirs * body.h[:, None]
            return float(np.max(np.linalg.norm(pts, axis=1)))
        wm = np.asarray(w, dtype=float)
        vals = [body.support(wm.T @ u) for u in dirs]
        return float(np.max(vals))
    raise TypeError(f"unsupported body {type(body)}")


def contains_scaled(k1, k2, c, grid=None):
    """Test K1 ⊆ c * K2; returns (ok, margin) with margin = sup h1 / h2.

    Exact for planar polygon/ellipsoid pairs (the supremum is attained on
    the facet normals of K2 or at the vertices of K1).
    """
    d = _check_same_dim(k1, k2)
    if d == 2:
        if isinstance(k2, Ellipsoid):
            if not k2.is_full():
                raise DegenerateBody("containment target must be full-dimensional")
            minv = np.linalg.inv(k2.m)
            if isinstance(k1, Ellipsoid):
                margin = opnorm(minv @ k1.m)
            else:
                p1 = promote(k1, grid)
                if p1.rank == 0:
                    margin = 0.0
                else:
                    margin = float(np.max(np.linalg.norm(p1.verts @ minv.T, axis=1)))
        else:
            p2 = promote(k2, grid)
            if p2.rank < 2:
                raise DegenerateBody("containment target must be full-dimensional")
            n, cc = p2.facets()
            h1 = k1.supports(n)  # exact for every representation
            margin = float(np.max(h1 / cc))
    else:
        g = grid if grid is not None else canonical_grid(d)
        h1 = k1.supports(g.dirs)
        h2 = k2.supports(g.dirs)
        if np.any(h2 <= 0):
            raise DegenerateBody("containment target must be full-dimensional")
        margin = float(np.max(h1 / h2))
    return margin <= c * (1.0 + 1e-12), margin


def _contact_polygon(body, grid):
    """Inscribed polygon through the support contact points of a smooth
    body; used by the Hausdorff metric so concentric pairs come out exact."""
    if isinstance(body, SymPolygon):
        return body
    if isinstance(body, Ellipsoid):
        if not body.is_full():
            return promote(body, grid)
        mu = grid.dirs @ body.m.T
        pts = mu @ body.m.T / np.linalg.norm(mu, axis=1)[:, None]
        return SymPolygon(pts, symmetrize=False)
    return promote(body, grid)


def hausdorff(k1, k2, rho=None, grid=None):
    """Hausdorff distance with respect to the norm |W .| (W = identity by
    default).  Exact for planar polygons; smooth bodies are replaced by
    their contact-point polygons on the grid."""
    d = _check_same_dim(k1, k2)
    if d != 2:
        g = grid if grid is not None else canonical_grid(d)
        h1, h2 = k1.supports(g.dirs), k2.supports(g.dirs)
        return float(np.max(np.abs(h1 - h2)))  # outer-polyhedron surrogate
    w = np.eye(2) if rho is None else np.asarray(rho, dtype=float)
    g = grid if grid is not None else canonical_grid(2)
    p1, p2 = _contact_polygon(k1, g), _contact_polygon(k2, g)
    v1 = p1.verts @ w.T
    v2 = p2.verts @ w.T
    return max(_sup_dist_to_poly(v1, v2), _sup_dist_to_poly(v2, v1))


def _sup_dist_to_poly(pts, poly):
    """max over pts of the Euclidean distance to the convex hull of poly."""
    if len(poly) == 1:
        return float(np.max(np.linalg.norm(pts - poly[0], axis=1)))
    a = poly
    b = np.roll(poly, -1, axis=0) if len(poly) > 2 else poly[::-1]
    e = b - a  # (m, 2) edges
    ee = np.sum(e * e, axis=1)
    ee[ee == 0] = 1.0
    # Distance from each point to each edge segment.
    diff = pts[:, None, :] - a[None, :, :]
    t = np.clip(np.sum(diff * e[None, :, :], axis=2) / ee[None, :], 0.0, 1.0)
    proj = a[None, :, :] + t[:, :, None] * e[None, :, :]
    dist_edges = np.min(np.linalg.norm(pts[:, None, :] - proj, axis=2), axis=1)
    if len(poly) > 2:
        n = np.column_stack([e[:, 1], -e[:, 0]])
        c = np.sum(n * a, axis=1)
        inside = np.all(pts @ n.T <= c[None, :] + 1e-12 * max(np.abs(poly).max(), 1.0), axis=1)
        dist_edges = np.where(inside, 0.0, dist_edges)
    return float(np.max(dist_edges))
