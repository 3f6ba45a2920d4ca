"""Dyadic domains, piecewise-constant matrix weights, convex-set valued
functions, vector fields, weight generators, and file I/O.

All integrals downstream are exact finite sums over the level-J cells, so
the simple-function evaluation of set-valued integrals is the exact
semantics of this grid model, not an approximation.
"""

from dataclasses import dataclass

import numpy as np

from . import _jsonio
from .bodies import ConvexBody, Ellipsoid, SupportSampled, SymPolygon
from .directions import canonical_grid
from .errors import (
    CubeOutsideDomain,
    DomainMismatch,
    NotSPD,
    SchemaMismatch,
)
from .spd import check_spd

WEIGHT_SCHEMA = "mwlab-weight-v1"
SETFN_SCHEMA = "mwlab-setfn-v1"
VECFIELD_SCHEMA = "mwlab-vecfield-v1"
SCALARFIELD_SCHEMA = "mwlab-scalarfield-v1"


@dataclass(frozen=True)
class DyadicDomain:
    """The base cube [origin, origin + size)^n tiled by 2^{nJ} level-J cells.

    Cell indices are lexicographic over integer coordinates (last axis
    fastest), which at n=1 makes every dyadic block contiguous.
    """

    n: int
    origin: tuple
    size: float
    level: int

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError("only 1- and 2-dimensional domains are supported")
        if self.level < 0:
            raise ValueError("level must be nonnegative")
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        if len(self.origin) != self.n:
            raise ValueError("origin length must match n")

    @property
    def num_cells(self):
        return 2 ** (self.n * self.level)

    @property
    def cell_width(self):
        return self.size / 2**self.level

    @property
    def cell_measure(self):
        return self.cell_width**self.n

    @property
    def total_measure(self):
        return self.size**self.n

    def cell_coords(self, idx):
        """Integer coordinates of cell idx (lexicographic, last axis fastest)."""
        m = 2**self.level
        if self.n == 1:
            return (idx,)
        return (idx // m, idx % m)

    def cell_midpoint(self, idx):
        co = self.cell_coords(idx)
        w = self.cell_width
        return np.array([self.origin[k] + (co[k] + 0.5) * w for k in range(self.n)])

    def midpoints(self):
        return np.array([self.cell_midpoint(i) for i in range(self.num_cells)])

    def num_cubes(self, level):
        return 2 ** (self.n * level)

    def cube_cells(self, level, index):
        """Indices of the level-J cells inside dyadic cube (level, index)."""
        if not 0 <= level <= self.level:
            raise CubeOutsideDomain(f"cube level {level} outside 0..{self.level}")
        if not 0 <= index < self.num_cubes(level):
            raise CubeOutsideDomain(f"cube index {index} outside level {level}")
        if self.n == 1:
            width = 2 ** (self.level - level)
            return np.arange(index * width, (index + 1) * width)
        m = 2**level
        ci, cj = index // m, index % m
        width = 2 ** (self.level - level)
        rows = np.arange(ci * width, (ci + 1) * width)
        cols = np.arange(cj * width, (cj + 1) * width)
        mm = 2**self.level
        return (rows[:, None] * mm + cols[None, :]).ravel()

    def cubes(self, min_level=0):
        """All dyadic cubes as (level, index) pairs, coarse to fine."""
        out = []
        for lev in range(min_level, self.level + 1):
            out.extend((lev, i) for i in range(self.num_cubes(lev)))
        return out

    def cube_children(self, level, index):
        """Indices of the 2^n child cubes at level + 1."""
        if level >= self.level:
            raise CubeOutsideDomain("cells have no children")
        if self.n == 1:
            return [2 * index, 2 * index + 1]
        m = 2**level
        ci, cj = index // m, index % m
        mm = 2 * m
        return [
            (2 * ci + a) * mm + (2 * cj + b) for a in range(2) for b in range(2)
        ]

    def ancestors(self, cell_idx):
        """The (level, index) chain of dyadic cubes containing a cell."""
        out = []
        co = self.cell_coords(cell_idx)
        for lev in range(self.level + 1):
            shift = self.level - lev
            if self.n == 1:
                out.append((lev, co[0] >> shift))
            else:
                m = 2**lev
                out.append((lev, (co[0] >> shift) * m + (co[1] >> shift)))
        return out

    def spec(self):
        return {"origin": list(self.origin), "size": self.size}


def _check_same_domain(a, b):
    if a.domain != b.domain:
        raise DomainMismatch("functions live on different domains")


class MatrixWeight:
    """Piecewise-constant SPD-matrix-valued weight on a dyadic domain."""

    def __init__(self, domain: DyadicDomain, cells):
        cells = np.ascontiguousarray(cells, dtype=float)
        if cells.shape[0] != domain.num_cells:
            raise ValueError("cell count does not match domain")
        if cells.ndim != 3 or cells.shape[1] != cells.shape[2]:
            raise ValueError("cells must be a stack of square matrices")
        for i, m in enumerate(cells):
            try:
                check_spd(m, f"weight cell {i}")
            except NotSPD as exc:
                raise NotSPD(str(exc)) from None
        cells.setflags(write=False)
        self.domain = domain
        self.cells = cells
        self.d = cells.shape[1]

    def inverse(self):
        inv = np.linalg.inv(self.cells)
        return MatrixWeight(self.domain, 0.5 * (inv + inv.transpose(0, 2, 1)))

    def power(self, t):
        from .spd import spd_power

        return MatrixWeight(self.domain, np.array([spd_power(m, t) for m in self.cells]))

    def scalar_multiply(self, field):
        """Cellwise product r(x) * W(x) for a positive scalar field r."""
        r = np.asarray(field, dtype=float)
        if np.any(r <= 0):
            raise NotSPD("scalar multiplier must be strictly positive")
        return MatrixWeight(self.domain, r[:, None, None] * self.cells)

    def __eq__(self, other):
        return (
            isinstance(other, MatrixWeight)
            and self.domain == other.domain
            and np.array_equal(self.cells, other.cells)
        )


class SetFunction:
    """Piecewise-constant convex-body-valued function on a dyadic domain."""

    def __init__(self, domain: DyadicDomain, cells):
        cells = list(cells)
        if len(cells) != domain.num_cells:
            raise ValueError("cell count does not match domain")
        dims = {b.dim for b in cells}
        if len(dims) != 1:
            raise ValueError("all cells must share one dimension")
        self.domain = domain
        self.cells = cells
        self.d = dims.pop()

    def map(self, fn):
        return SetFunction(self.domain, [fn(b) for b in self.cells])


class VectorField:
    """Piecewise-constant vector-valued function on a dyadic domain."""

    def __init__(self, domain: DyadicDomain, cells):
        cells = np.ascontiguousarray(cells, dtype=float)
        if cells.shape[0] != domain.num_cells or cells.ndim != 2:
            raise ValueError("cells must be (num_cells, d)")
        if not np.isfinite(cells).all():
            raise ValueError("vector field has non-finite entries")
        cells.setflags(write=False)
        self.domain = domain
        self.cells = cells
        self.d = cells.shape[1]


class ScalarField:
    """Piecewise-constant scalar function on a dyadic domain."""

    def __init__(self, domain: DyadicDomain, cells):
        cells = np.ascontiguousarray(cells, dtype=float)
        if cells.shape != (domain.num_cells,):
            raise ValueError("cells must be (num_cells,)")
        cells.setflags(write=False)
        self.domain = domain
        self.cells = cells


# ---------------------------------------------------------------------------
# generators


def _radial_average(domain, idx, alpha, center):
    """Cell average of |x - c|^alpha (adaptive quadrature at n=1, tensor
    Gauss-Legendre at n=2); may return inf for a non-integrable center."""
    w = domain.cell_width
    co = domain.cell_coords(idx)
    if domain.n == 1:
        from scipy.integrate import quad

        lo = domain.origin[0] + co[0] * w
        hi = lo + w
        c = center[0]
        if alpha <= -1.0 and lo <= c <= hi:
            return np.inf
        pts = [c] if lo < c < hi else None
        val, _ = quad(
            lambda x: np.abs(x - c) ** alpha, lo, hi, points=pts, epsabs=1e-13, epsrel=1e-13, limit=200
        )
        return float(val / w)
    nodes, weights = np.polynomial.legendre.leggauss(64)
    axes = []
    for k in range(domain.n):
        lo = domain.origin[k] + co[k] * w
        axes.append((0.5 * w * nodes + lo + 0.5 * w, 0.5 * w * weights))
    (x, wx), (y, wy) = axes
    xx, yy = np.meshgrid(x, y, indexing="ij")
    r = np.sqrt((xx - center[0]) ** 2 + (yy - center[1]) ** 2)
    return float(np.sum(r**alpha * wx[:, None] * wy[None, :]) / w**2)


def _cell_contains(domain, idx, point):
    w = domain.cell_width
    co = domain.cell_coords(idx)
    for k in range(domain.n):
        lo = domain.origin[k] + co[k] * w
        if not lo <= point[k] <= lo + w:
            return False
    return True


def gen_power_weight(domain, d, alpha, center=None):
    """W(x) = |x - c|^alpha * I, evaluated at cell midpoints.

    Cells whose closure contains the center (in particular any cell whose
    midpoint coincides with it) use the cell average of |x - c|^alpha
    where that average is finite, keeping every cell SPD; non-integrable
    centers fall back to the midpoint value.
    """
    center = np.zeros(domain.n) if center is None else np.asarray(center, dtype=float)
    eye = np.eye(d)
    cells = []
    for i in range(domain.num_cells):
        r = float(np.linalg.norm(domain.cell_midpoint(i) - center))
        val = None
        if _cell_contains(domain, i, center):
            avg = _radial_average(domain, i, alpha, center)
            if np.isfinite(avg) and avg > 0:
                val = avg
        if val is None:
            val = r**alpha
        cells.append(val * eye)
    return MatrixWeight(domain, np.array(cells))


def gen_rotating_weight(domain, a, b, omega):
    """W(x) = R(omega s) diag(e^a, e^b) R(omega s)^T with s the coordinate sum.

    ``a`` and ``b`` may be scalars or callables of the cell midpoint; with
    omega = 0 the family is commuting diagonal, otherwise genuinely
    non-commuting.
    """
    cells = []
    for i in range(domain.num_cells):
        x = domain.cell_midpoint(i)
        s = float(np.sum(x))
        av = a(x) if callable(a) else float(a)
        bv = b(x) if callable(b) else float(b)
        th = omega * s
        c, sn = np.cos(th), np.sin(th)
        rot = np.array([[c, -sn], [sn, c]])
        cells.append(rot @ np.diag([np.exp(av), np.exp(bv)]) @ rot.T)
    return MatrixWeight(domain, np.array(cells))


def sign_flip_field(domain):
    """f(x) = (1, 1) for x >= 0 and (-1, 1) for x < 0 on a 1-d domain."""
    if domain.n != 1:
        raise ValueError("the sign-flip field is one-dimensional")
    cells = []
    for i in range(domain.num_cells):
        x = domain.cell_midpoint(i)[0]
        cells.append([1.0, 1.0] if x >= 0 else [-1.0, 1.0])
    return VectorField(domain, np.array(cells))


def lift_vector_field(f: VectorField):
    """Lift a vector field to the set function x -> conv{f(x), -f(x)}."""
    from .bodies import segment

    return SetFunction(f.domain, [segment(v) for v in f.cells])


def constant_set_function(domain, body: ConvexBody):
    return SetFunction(domain, [body] * domain.num_cells)


# ---------------------------------------------------------------------------
# file I/O


def _domain_to_json(domain):
    return {
        "n": domain.n,
        "domain": domain.spec(),
        "level": domain.level,
    }


def _domain_from_json(doc):
    try:
        return DyadicDomain(
            n=int(doc["n"]),
            origin=tuple(doc["domain"]["origin"]),
            size=float(doc["domain"]["size"]),
            level=int(doc["level"]),
        )
    except (KeyError, TypeError) as exc:
        raise SchemaMismatch(f"bad domain description: {exc}") from None


def save_weight(w: MatrixWeight, path):
    doc = {
        "schema": WEIGHT_SCHEMA,
        "d": w.d,
        **_domain_to_json(w.domain),
        "cells": [m.reshape(-1).tolist() for m in w.cells],
    }
    _jsonio.dump_canonical(doc, path)


def load_weight(path):
    doc = _jsonio.load(path)
    if not isinstance(doc, dict) or doc.get("schema") != WEIGHT_SCHEMA:
        raise SchemaMismatch(f"{path}: expected schema {WEIGHT_SCHEMA}")
    domain = _domain_from_json(doc)
    d = int(doc["d"])
    cells = []
    for i, flat in enumerate(doc["cells"]):
        m = np.array(flat, dtype=float).reshape(d, d)
        try:
            check_spd(m, f"cell {i}")
        except NotSPD as exc:
            raise NotSPD(f"{path}: {exc}") from None
        cells.append(m)
    return MatrixWeight(domain, np.array(cells))


def _body_to_json(body):
    if isinstance(body, Ellipsoid):
        return {"type": "ellipsoid", "m": body.m.reshape(-1).tolist()}
    if isinstance(body, SymPolygon):
        return {"type": "polygon", "verts": body.verts.tolist()}
    if isinstance(body, SupportSampled):
        return {"type": "support", "h": body.h.tolist()}
    raise TypeError(f"cannot serialize body {type(body)}")


def _body_from_json(doc, d, grid):
    kind = doc.get("type")
    if kind == "ellipsoid":
        m = np.array(doc["m"], dtype=float)
        side = int(round(np.sqrt(m.size)))
        return Ellipsoid(m.reshape(side, side))
    if kind == "polygon":
        return SymPolygon(np.array(doc["verts"], dtype=float), symmetrize=False)
    if kind == "support":
        h = np.array(doc["h"], dtype=float)
        if d == 2:
            from .bodies import polygon_from_supports

            return polygon_from_supports(grid.dirs, h)
        return SupportSampled(grid, h)
    raise SchemaMismatch(f"unknown body type {kind!r}")


def save_set_function(f: SetFunction, path, grid=None):
    grid = grid if grid is not None else canonical_grid(f.d)
    doc = {
        "schema": SETFN_SCHEMA,
        "d": f.d,
        "dirs": grid.name,
        **_domain_to_json(f.domain),
        "cells": [_body_to_json(b) for b in f.cells],
    }
    _jsonio.dump_canonical(doc, path)


def load_set_function(path):
    doc = _jsonio.load(path)
    if not isinstance(doc, dict) or doc.get("schema") != SETFN_SCHEMA:
        raise SchemaMismatch(f"{path}: expected schema {SETFN_SCHEMA}")
    domain = _domain_from_json(doc)
    d = int(doc["d"])
    name = doc.get("dirs", "")
    try:
        count = int(name.split("-")[-1])
    except ValueError:
        raise SchemaMismatch(f"{path}: bad direction-grid name {name!r}") from None
    grid = canonical_grid(d, count)
    cells = [_body_from_json(c, d, grid) for c in doc["cells"]]
    return SetFunction(domain, cells)


def save_vector_field(f: VectorField, path):
    doc = {
        "schema": VECFIELD_SCHEMA,
        "d": f.d,
        **_domain_to_json(f.domain),
        "cells": f.cells.tolist(),
    }
    _jsonio.dump_canonical(doc, path)


def load_vector_field(path):
    doc = _jsonio.load(path)
    if not isinstance(doc, dict) or doc.get("schema") != VECFIELD_SCHEMA:
        raise SchemaMismatch(f"{path}: expected schema {VECFIELD_SCHEMA}")
    domain = _domain_from_json(doc)
    return VectorField(domain, np.array(doc["cells"], dtype=float))


def save_scalar_field(f: ScalarField, path):
    doc = {
        "schema": SCALARFIELD_SCHEMA,
        **_domain_to_json(f.domain),
        "cells": f.cells.tolist(),
    }
    _jsonio.dump_canonical(doc, path)


def load_scalar_field(path):
    doc = _jsonio.load(path)
    if not isinstance(doc, dict) or doc.get("schema") != SCALARFIELD_SCHEMA:
        raise SchemaMismatch(f"{path}: expected schema {SCALARFIELD_SCHEMA}")
    domain = _domain_from_json(doc)
    return ScalarField(domain, np.array(doc["cells"], dtype=float))
