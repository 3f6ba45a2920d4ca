import numpy as np
import pytest

from mwlab.bodies import (
    Ellipsoid,
    SymPolygon,
    contains_scaled,
    hull_union,
    minkowski_sum,
    scale,
    segment,
    set_norm,
)
from mwlab.directions import canonical_grid
from mwlab.grid import (
    DyadicDomain,
    MatrixWeight,
    SetFunction,
    VectorField,
    constant_set_function,
    lift_vector_field,
    sign_flip_field,
)
from mwlab.maximal import (
    aumann_average,
    christ_goldberg,
    combined_shifted_bound,
    dp_metric,
    dyadic_maximal,
    dyadic_maximal_supports,
    exhaust,
    interval_maximal_supports,
    lpk_norm,
    maximal_set_norms,
    shifted_maximal,
    supports_matrix,
    weak_level_measure,
)

from conftest import rand_polygon, rand_weight

DOM5 = DyadicDomain(n=1, origin=(-1.0,), size=2.0, level=3)
SIGN_FIELD = lift_vector_field(sign_flip_field(DOM5))


def rand_set_function(rng, level=4, kind="mixed"):
    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=level)
    cells = []
    for _ in range(dom.num_cells):
        r = rng.random()
        if kind == "segments" or (kind == "mixed" and r < 0.5):
            cells.append(segment(rng.normal(size=2)))
        else:
            cells.append(rand_polygon(rng, 3, 0.3))
    return SetFunction(dom, cells)


# ---------------------------------------------------------------------------
# averaging


def test_average_constant():
    f = constant_set_function(DOM5, SymPolygon([[1.0, 1.0], [-1.0, 1.0]]))
    avg = aumann_average(f, (0, 0))
    assert np.allclose(np.sort(avg.verts, axis=0), np.sort(f.cells[0].verts, axis=0))


def test_average_sign_field_is_diamond():
    avg = aumann_average(SIGN_FIELD, (0, 0))
    got = {(round(x, 12), round(y, 12)) for x, y in avg.verts}
    assert got == {(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)}


def test_average_half_mass():
    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=1)
    k = SymPolygon([[1.0, 1.0], [-1.0, 1.0]])
    f = SetFunction(dom, [SymPolygon([[0.0, 0.0]]), k])
    avg = aumann_average(f, (0, 0))
    assert np.allclose(np.abs(avg.verts).max(), 0.5)


def test_averaging_contraction_all_p(rng):
    f = rand_set_function(rng, 4)
    for p in (1.0, 1.5, 2.0, 3.0, np.inf):
        nf = lpk_norm(f, None, p)
        for cube in [(0, 0), (1, 1), (2, 2), (4, 7)]:
            avg = aumann_average(f, cube)
            level, index = cube
            width = f.domain.cell_width * 2 ** (f.domain.level - level)
            if np.isinf(p):
                na = set_norm(avg)
            else:
                na = set_norm(avg) * width ** (1.0 / p)
            assert na <= nf * (1.0 + 1e-12)


# ---------------------------------------------------------------------------
# dyadic maximal operator


def test_maximal_constant_fixed_point():
    f = constant_set_function(DOM5, SymPolygon([[1.0, 1.0], [-1.0, 1.0]]))
    m = dyadic_maximal(f)
    for cell in m.cells:
        assert np.allclose(np.sort(cell.verts, axis=0), np.sort(f.cells[0].verts, axis=0))


def test_maximal_sign_field_hexagon():
    m = dyadic_maximal(SIGN_FIELD)
    # brute-force oracle: enumerate ancestors, average by vertex sums, hull
    dom = SIGN_FIELD.domain
    for i in range(dom.num_cells):
        bodies = []
        for lev, idx in dom.ancestors(i):
            sel = dom.cube_cells(lev, idx)
            acc = scale(SIGN_FIELD.cells[sel[0]], 1.0 / len(sel))
            for j in sel[1:]:
                acc = minkowski_sum(acc, scale(SIGN_FIELD.cells[j], 1.0 / len(sel)))
            bodies.append(acc)
        oracle = hull_union(bodies)
        dirs = canonical_grid(2, 64).dirs
        assert np.abs(m.cells[i].supports(dirs) - oracle.supports(dirs)).max() < 1e-12
    # cells right of the flip see the hexagon spanned by the diamond and
    # the segment through (1, 1)
    hexagon = m.cells[dom.num_cells // 2]
    got = {(round(x, 12), round(y, 12)) for x, y in hexagon.verts}
    assert got == {(1.0, 1.0), (-1.0, -1.0), (1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)}


def test_maximal_dominates_f(rng):
    f = rand_set_function(rng, 4)
    m = dyadic_maximal(f)
    dirs = canonical_grid(2, 32).dirs
    for i in range(f.domain.num_cells):
        hf = f.cells[i].supports(dirs)
        hm = m.cells[i].supports(dirs)
        assert np.all(hf <= hm + 1e-12)


def test_maximal_supports_path_matches(rng):
    f = rand_set_function(rng, 4)
    m = dyadic_maximal(f)
    dirs = canonical_grid(2, 48).dirs
    fast = dyadic_maximal_supports(f, dirs)
    slow = np.vstack([b.supports(dirs) for b in m.cells])
    assert np.abs(fast - slow).max() < 1e-11


def test_maximal_sublinear(rng):
    f = rand_set_function(rng, 3)
    g = rand_set_function(rng, 3)
    fg = SetFunction(f.domain, [minkowski_sum(a, b) for a, b in zip(f.cells, g.cells)])
    mf, mg, mfg = dyadic_maximal(f), dyadic_maximal(g), dyadic_maximal(fg)
    dirs = canonical_grid(2, 64).dirs
    for i in range(f.domain.num_cells):
        lhs = mfg.cells[i].supports(dirs)
        rhs = mf.cells[i].supports(dirs) + mg.cells[i].supports(dirs)
        assert np.all(lhs <= rhs * (1 + 1e-12) + 1e-12)


def test_power_sublinearity(rng):
    # per-cell p-power sublinearity of the scalar-scaled maximal operator
    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=3)
    h = constant_set_function(dom, rand_polygon(rng, 3))
    f = rng.random(8) + 0.1
    g = rng.random(8) + 0.1
    p = 2.0

    def scaled_max_norm(coeffs):
        cells = [scale(h.cells[i], coeffs[i]) for i in range(8)]
        return maximal_set_norms(SetFunction(dom, cells))

    lhs = scaled_max_norm((f + g) ** p) ** (1.0 / p)
    rhs = scaled_max_norm(f**p) ** (1.0 / p) + scaled_max_norm(g**p) ** (1.0 / p)
    assert np.all(lhs <= rhs + 1e-10)


# ---------------------------------------------------------------------------
# weak and strong type


def test_weak_level_trivial_cases(rng):
    f = rand_set_function(rng, 4)
    n1 = lpk_norm(f, None, 1.0)
    big = 10 * maximal_set_norms(f).max()
    assert weak_level_measure(f, big) == 0.0
    tiny = 1e-9 * maximal_set_norms(f).min()
    assert weak_level_measure(f, tiny) == pytest.approx(f.domain.total_measure)


def test_weak_one_one_constant_one(rng):
    for _ in range(5):
        f = rand_set_function(rng, 5)
        n1 = lpk_norm(f, None, 1.0)
        for lam in np.geomspace(1e-3, 10.0, 20):
            assert lam * weak_level_measure(f, lam) <= n1 * (1.0 + 1e-9)


def test_weak_single_spike():
    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=3)
    cells = [SymPolygon([[0.0, 0.0]])] * 7 + [segment([1.0, 0.0])]
    f = SetFunction(dom, cells)
    norms = maximal_set_norms(f)
    # the spike's dyadic stack: averages are 2^{-k} on the ancestor chain
    assert norms[-1] == pytest.approx(1.0)
    assert norms[-2] == pytest.approx(0.5)
    # measure where maximal norm > 0.3: cells covered by ancestors with
    # average above 0.3: the last two cells (values 1 and 1/2)
    assert weak_level_measure(f, 0.3) == pytest.approx(2.0 / 8.0)


def test_strong_p_bound(rng):
    for p in (1.5, 2.0, 3.0):
        pp = p / (p - 1.0)
        for _ in range(3):
            f = rand_set_function(rng, 5)
            lhs = lpk_norm_of_maximal = np.sum(
                maximal_set_norms(f) ** p * f.domain.cell_measure
            )
            rhs = 2.0 ** (p - 1.0) * pp * lpk_norm(f, None, p) ** p
            assert lhs <= rhs


# ---------------------------------------------------------------------------
# interval oracle and shifted grids


def test_interval_oracle_constant_field():
    f = constant_set_function(DOM5, segment([1.0, 1.0]))
    dirs = canonical_grid(2, 16).dirs
    sup = interval_maximal_supports(f, [0.3], 2.0**-6, dirs)
    assert np.abs(sup[0] - f.cells[0].supports(dirs)).max() < 1e-12


def test_interval_oracle_near_zero_square():
    # near the sign flip the oracle reproduces the full-plane maximal value
    dirs = canonical_grid(2, 64).dirs
    res = 2.0**-10
    sup = interval_maximal_supports(SIGN_FIELD, [res / 2], res, dirs)
    square = SymPolygon([[1.0, 1.0], [-1.0, 1.0]])
    err = np.abs(sup[0] - square.supports(dirs)).max()
    assert err <= 2e-3
    res2 = 2.0**-11
    sup2 = interval_maximal_supports(SIGN_FIELD, [res2 / 2], res2, dirs)
    err2 = np.abs(sup2[0] - square.supports(dirs)).max()
    assert err2 < err


def test_shifted_zero_matches_dyadic(rng):
    f = rand_set_function(rng, 3)
    m0 = shifted_maximal(f, 0.0)
    md = dyadic_maximal(f)
    dirs = canonical_grid(2, 32).dirs
    assert np.abs(supports_matrix(m0, dirs) - supports_matrix(md, dirs)).max() < 1e-12


def test_shifted_constant_field():
    f = constant_set_function(DOM5, segment([1.0, 2.0]))
    m = shifted_maximal(f, 1.0 / 3.0)
    dirs = canonical_grid(2, 16).dirs
    for b in m.cells:
        assert np.abs(b.supports(dirs) - f.cells[0].supports(dirs)).max() < 1e-12


def test_combined_shift_bound_contains_oracle():
    comb = combined_shifted_bound(SIGN_FIELD, extra_levels=2)
    fine = comb.domain
    pts = [fine.cell_midpoint(i)[0] for i in range(fine.num_cells)]
    dirs = canonical_grid(2, 32).dirs
    oracle = interval_maximal_supports(SIGN_FIELD, pts, 2.0 ** -(SIGN_FIELD.domain.level + 2), dirs)
    ratios = []
    for i in range(fine.num_cells):
        hs = comb.cells[i].supports(dirs)
        ratios.append(np.max(oracle[i] / hs))
    c = max(ratios)
    assert c <= 3.0 * (1.0 + 1e-9)


# ---------------------------------------------------------------------------
# Christ-Goldberg maximal operator


def test_cg_identity_weight_constant_field():
    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=3)
    w = MatrixWeight(dom, np.array([np.eye(2)] * 8))
    f = VectorField(dom, np.tile([3.0, 4.0], (8, 1)))
    out = christ_goldberg(w, f)
    assert np.allclose(out.cells, 5.0)


def test_cg_scalar_weight_cancels(rng):
    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=3)
    wvals = np.exp(rng.normal(size=8))
    w = MatrixWeight(dom, np.array([v * np.eye(2) for v in wvals]))
    fv = rng.normal(size=(8, 2))
    f = VectorField(dom, fv)
    out = christ_goldberg(w, f)
    # oracle: w cancels against w^{-1} only pointwise in x; the inner
    # average uses |w(x)/w(y)| |f(y)|
    from mwlab._kernels_py import ancestor_max_mean_rows

    g = np.abs(wvals[:, None] / wvals[None, :]) * np.linalg.norm(fv, axis=1)[None, :]
    expect = ancestor_max_mean_rows(g)
    assert np.allclose(out.cells, expect, rtol=1e-12)


def test_cg_brute_force_small(rng):
    w = rand_weight(rng, 2)
    f = VectorField(w.domain, rng.normal(size=(4, 2)))
    out = christ_goldberg(w, f)
    winv = np.linalg.inv(w.cells)
    for x in range(4):
        best = -np.inf
        for lev, idx in w.domain.ancestors(x):
            sel = w.domain.cube_cells(lev, idx)
            vals = [np.linalg.norm(w.cells[x] @ winv[y] @ f.cells[y]) for y in sel]
            best = max(best, float(np.mean(vals)))
        assert out.cells[x] == pytest.approx(best, rel=1e-12)


def test_cg_infinity_bound(rng):
    from mwlab.ap import ap_constant

    w = rand_weight(rng, 3)
    f = VectorField(w.domain, rng.normal(size=(8, 2)))
    out = christ_goldberg(w, f)
    cinf = ap_constant(w, np.inf, "ainfty").constant
    fmax = np.linalg.norm(f.cells, axis=1).max()
    assert out.cells.max() <= cinf * fmax * (1.0 + 1e-9)


# ---------------------------------------------------------------------------
# exhausting operator


def test_exhaust_fixed_point(rng):
    w = rand_weight(rng, 2)
    winv = np.linalg.inv(w.cells)
    h = SetFunction(w.domain, [Ellipsoid(0.5 * (m + m.T)) for m in winv])
    out = exhaust(w, h)
    for a, b in zip(h.cells, out.cells):
        assert np.abs(a.m - b.m).max() < 1e-12


def test_exhaust_square_becomes_disc():
    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=0)
    w = MatrixWeight(dom, np.array([np.eye(2)]))
    h = SetFunction(dom, [SymPolygon([[1.0, 1.0], [-1.0, 1.0]])])
    out = exhaust(w, h)
    assert np.allclose(out.cells[0].m, np.sqrt(2.0) * np.eye(2))


def test_exhaust_contains_and_isometry(rng):
    w = rand_weight(rng, 3)
    f = rand_set_function(rng, 3)
    out = exhaust(w, f)
    for i in range(8):
        ok, margin = contains_scaled(f.cells[i], out.cells[i], 1.0)
        assert margin <= 1.0 + 1e-12
    for p in (1.0, 2.0, 3.0):
        assert lpk_norm(out, w, p) == pytest.approx(lpk_norm(f, w, p), rel=1e-12)


# ---------------------------------------------------------------------------
# norms and metric


def test_lpk_norm_unit_ball():
    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=2)
    f = constant_set_function(dom, Ellipsoid(np.eye(2)))
    for p in (1.0, 2.0, np.inf):
        assert lpk_norm(f, None, p) == pytest.approx(1.0)


def test_lpk_scalar_reduction(rng):
    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=3)
    vals = rng.random(8) + 0.2
    f = SetFunction(dom, [Ellipsoid(v * np.eye(2)) for v in vals])
    for p in (1.0, 2.0, 3.0):
        expect = (np.sum(vals**p) / 8.0) ** (1.0 / p)
        assert lpk_norm(f, None, p) == pytest.approx(expect, rel=1e-12)


def test_dp_metric_axioms(rng):
    f = rand_set_function(rng, 3)
    g = rand_set_function(rng, 3)
    assert dp_metric(f, f, None, 2.0) == 0.0
    assert dp_metric(f, g, None, 2.0) == dp_metric(g, f, None, 2.0)
    zero = constant_set_function(f.domain, SymPolygon([[0.0, 0.0]]))
    assert dp_metric(f, zero, None, 2.0) == pytest.approx(lpk_norm(f, None, 2.0), rel=1e-12)


def test_dp_metric_translation_invariance(rng):
    f = rand_set_function(rng, 3)
    g = rand_set_function(rng, 3)
    h = rand_set_function(rng, 3)
    fh = SetFunction(f.domain, [minkowski_sum(a, b) for a, b in zip(f.cells, h.cells)])
    gh = SetFunction(f.domain, [minkowski_sum(a, b) for a, b in zip(g.cells, h.cells)])
    assert dp_metric(fh, gh, None, 2.0) == pytest.approx(dp_metric(f, g, None, 2.0), abs=1e-10)


# ---------------------------------------------------------------------------
# Aumann Hölder and Minkowski inequalities


def test_aumann_holder(rng):
    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=3)
    h = constant_set_function(dom, rand_polygon(rng, 3))
    p = 2.0
    f = rng.random(8) + 0.1
    g = rng.random(8) + 0.1

    def avg_norm_scaled(coeffs):
        cells = [scale(h.cells[i], coeffs[i]) for i in range(8)]
        return set_norm(aumann_average(SetFunction(dom, cells), (0, 0)))

    lhs = avg_norm_scaled(f * g)
    rhs = avg_norm_scaled(f**p) ** 0.5 * avg_norm_scaled(g**p) ** 0.5
    assert lhs <= rhs + 1e-10


def test_aumann_minkowski(rng):
    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=3)
    h = constant_set_function(dom, rand_polygon(rng, 3))
    p = 2.0
    f = rng.random(8) + 0.1
    g = rng.random(8) + 0.1

    def avg_norm_scaled(coeffs):
        cells = [scale(h.cells[i], coeffs[i]) for i in range(8)]
        return set_norm(aumann_average(SetFunction(dom, cells), (0, 0)))

    lhs = avg_norm_scaled((f + g) ** p) ** (1.0 / p)
    rhs = avg_norm_scaled(f**p) ** (1.0 / p) + avg_norm_scaled(g**p) ** (1.0 / p)
    assert lhs <= rhs + 1e-10


def test_maximal_2d_domain(rng):
    dom = DyadicDomain(n=2, origin=(0.0, 0.0), size=1.0, level=2)
    cells = [segment(rng.normal(size=2)) for _ in range(dom.num_cells)]
    f = SetFunction(dom, cells)
    m = dyadic_maximal(f)
    dirs = canonical_grid(2, 16).dirs
    fast = dyadic_maximal_supports(f, dirs)
    slow = np.vstack([b.supports(dirs) for b in m.cells])
    assert np.abs(fast - slow).max() < 1e-11
