import numpy as np
import pytest

from mwlab.ap import conjugate, scalar_oracle
from mwlab.errors import BoundViolation, ExponentOutOfRange, NonMonotoneOperator
from mwlab.grid import DyadicDomain, MatrixWeight, gen_rotating_weight
from mwlab.maximal import lpk_norm
from mwlab.rdf import (
    IterationConfig,
    certify_bound,
    duo_rescale,
    ellipsoid_maximal_norm,
    factorize,
    iterate,
    iterate_scalar,
    op_PW,
    op_T1,
    op_T2,
    reverse_factorize,
)

from conftest import rand_weight


def l_norm(dom, q):
    mu = dom.cell_measure
    return lambda r: float(np.sum(np.asarray(r) ** q * mu) ** (1.0 / q))


def identity_weight(level):
    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=level)
    return MatrixWeight(dom, np.array([np.eye(2)] * dom.num_cells))


def rotating_weight(level, amp=0.6, omega=2 * np.pi):
    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=level)
    return gen_rotating_weight(
        dom, lambda x: amp * np.sin(3 * x[0]), lambda x: -amp * np.sin(2 * x[0] + 0.3), omega
    )


# ---------------------------------------------------------------------------
# scalar realizations


def test_t1_identity_weight_constant():
    w = identity_weight(3)
    t1 = op_T1(w, 2.0)
    r = np.full(8, 2.5)
    assert np.allclose(t1(r), 2.5, rtol=1e-12)


def test_t_ops_scalar_reduction(rng):
    # diagonal scalar weight: the body field is r^{p'} w^{-1} B, so T1
    # reduces to [w_x max-avg(r^{p'} / w)]^{1/p'}
    vals = np.exp(rng.normal(size=8) * 0.4)
    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=3)
    w = MatrixWeight(dom, np.array([v * np.eye(2) for v in vals]))
    p = 2.0
    pp = conjugate(p)
    t1 = op_T1(w, p)
    r = np.exp(rng.normal(size=8))
    from mwlab._kernels_py import tree_max_avg

    inner = tree_max_avg((r**pp / vals)[:, None])[:, 0]
    expect = (vals * inner) ** (1.0 / pp)
    assert np.allclose(t1(r), expect, rtol=1e-12)


def test_t_ops_sublinear_and_monotone(rng):
    w = rotating_weight(4)
    for t_op in (op_T1(w, 2.0), op_T2(w, 2.0), op_PW(w)):
        a = np.exp(rng.normal(size=16))
        b = np.exp(rng.normal(size=16))
        assert np.all(t_op(a + b) <= t_op(a) + t_op(b) + 1e-10)
        assert np.all(t_op(a) <= t_op(a + b) + 1e-12)  # monotone


def test_ellipsoid_maximal_linear_in_scale(rng):
    w = rand_weight(rng, 3)
    winv = w.inverse()
    c = rng.random(8)
    one = ellipsoid_maximal_norm(c, winv.cells, w.cells)
    three = ellipsoid_maximal_norm(3.0 * c, winv.cells, w.cells)
    assert np.allclose(three, 3.0 * one, rtol=1e-13)


# ---------------------------------------------------------------------------
# certify_bound and iterate


def test_certify_identity_operator(rng):
    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=3)
    norm = l_norm(dom, 2.0)
    b = certify_bound(lambda r: r, norm, lambda: np.exp(rng.normal(size=8)), probes=8, safety=1.3)
    assert b == pytest.approx(1.3)


def test_certify_averaging_identity_weight(rng):
    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=3)
    norm = l_norm(dom, 2.0)
    avg_op = lambda r: np.full_like(r, np.mean(r))
    b = certify_bound(avg_op, norm, lambda: np.exp(rng.normal(size=8)), probes=16, safety=1.1)
    assert b <= 1.1 * (1.0 + 1e-12)


def test_iterate_zero_operator(rng):
    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=3)
    g = np.exp(rng.normal(size=8))
    cfg = IterationConfig(bound=0.0, k_max=20, p=2.0)
    out, b = iterate_scalar(lambda r: np.zeros_like(r), g, cfg, l_norm(dom, 2.0), validate=False)
    assert np.array_equal(out, g)


def test_iterate_identity_geometric_series(rng):
    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=3)
    g = np.exp(rng.normal(size=8))
    for k_max in (5, 12):
        cfg = IterationConfig(bound=1.0, k_max=k_max, p=2.0)
        out, _ = iterate_scalar(lambda r: r.copy(), g, cfg, l_norm(dom, 2.0), validate=False)
        assert np.allclose(out, (2.0 - 2.0 ** (1 - k_max)) * g, rtol=1e-12)


def test_iterate_escalates_and_raises(rng):
    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=3)
    g = np.exp(rng.normal(size=8))
    grow = lambda r: 10.0 * r
    cfg = IterationConfig(bound=1.0, k_max=10, p=2.0, safety=1.01, max_escalations=2)
    with pytest.raises(BoundViolation):
        iterate_scalar(grow, g, cfg, l_norm(dom, 2.0), validate=False)


def test_iterate_nonmonotone_detected(rng):
    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=3)
    g = np.exp(rng.normal(size=8))
    bad = lambda r: 1.0 / (r + 0.1)
    cfg = IterationConfig(bound=5.0, k_max=5, p=2.0)
    with pytest.raises(NonMonotoneOperator):
        iterate_scalar(bad, g, cfg, l_norm(dom, 2.0))


def test_iterate_properties_maximal(rng):
    # T = P_W: containment, norm bound, absorption, all within tail slack
    for level in (3, 4):
        w = rotating_weight(level)
        dom = w.domain
        pw = op_PW(w)
        norm = l_norm(dom, 2.0)
        b0 = certify_bound(pw, norm, lambda: np.exp(rng.normal(size=dom.num_cells)), probes=16)
        g = np.exp(rng.normal(size=dom.num_cells))
        cfg = IterationConfig(bound=b0, k_max=34, p=2.0)
        sg, b = iterate_scalar(pw, g, cfg, norm)
        tail = 2.0**-28 * norm(g)
        assert np.all(g <= sg * (1 + 1e-12))
        assert norm(sg) <= 2.0 * norm(g) * (1 + 1e-12)
        assert np.all(pw(sg) <= 2.0 * b * sg + tail)


def test_iterate_set_function_version(rng):
    from mwlab.grid import SetFunction
    from mwlab.bodies import segment
    from mwlab.maximal import dyadic_maximal

    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=3)
    cells = [segment(rng.normal(size=2)) for _ in range(8)]
    g = SetFunction(dom, cells)
    norm = lambda f: lpk_norm(f, None, 2.0)
    t_op = dyadic_maximal
    b0 = certify_bound(t_op, norm, lambda: g, probes=2)
    cfg = IterationConfig(bound=b0, k_max=12, p=2.0)
    sg, b = iterate(t_op, g, cfg, norm)
    from mwlab.directions import canonical_grid

    dirs = canonical_grid(2, 16).dirs
    for i in range(8):
        hg = g.cells[i].supports(dirs)
        hs = sg.cells[i].supports(dirs)
        assert np.all(hg <= hs + 1e-12)
    assert norm(sg) <= 2.0 * norm(g) * (1 + 1e-12) + 2.0**-10 * norm(g)
    # absorption: T(SG) inside 2B SG up to the truncation tail
    tsg = t_op(sg)
    tail = 2.0 ** (1 - cfg.k_max) * norm(g) * 4.0
    for i in range(8):
        ht = tsg.cells[i].supports(dirs)
        hs = sg.cells[i].supports(dirs)
        assert np.all(ht <= 2.0 * b * hs + tail)


# ---------------------------------------------------------------------------
# factorization


def test_factorize_constant_weight(rng):
    from conftest import rand_spd

    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=3)
    a = rand_spd(rng)
    w = MatrixWeight(dom, np.array([a] * 8))
    res = factorize(w, 2.0)
    assert res.product_residual <= 1e-12
    assert np.allclose(res.rbar.cells, res.rbar.cells[0])
    assert res.report_a1.constant == pytest.approx(1.0, abs=1e-8)
    assert res.report_ainfty.constant == pytest.approx(1.0, abs=1e-8)


def test_factorize_scalar_pipeline(rng):
    vals = np.exp(rng.normal(size=8) * 0.4)
    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=3)
    w = MatrixWeight(dom, np.array([v * np.eye(2) for v in vals]))
    res = factorize(w, 2.0)
    assert res.product_residual <= 1e-12
    rbar = res.rbar.cells
    w0_scalar = rbar**2 * vals
    w1_scalar = rbar**-2.0 * vals
    assert np.isfinite(scalar_oracle(w0_scalar, 1.0))
    assert np.isfinite(scalar_oracle(w1_scalar, np.inf))
    assert np.allclose(res.w0.cells[:, 0, 0], w0_scalar, rtol=1e-12)
    assert np.allclose(res.w1.cells[:, 0, 0], w1_scalar, rtol=1e-12)


def test_factorize_rotating_suite(rng):
    for level in (3, 4):
        w = rotating_weight(level)
        res = factorize(w, 2.0)
        assert res.product_residual <= 1e-12
        assert np.isfinite(res.report_a1.constant)
        assert np.isfinite(res.report_ainfty.constant)
        # scalar-multiple structure
        ratios = res.w0.cells / w.cells
        assert np.allclose(ratios, ratios[:, :1, :1], rtol=1e-10)


def test_factorize_needs_open_interval():
    w = identity_weight(2)
    with pytest.raises(ExponentOutOfRange):
        factorize(w, 1.0)


# ---------------------------------------------------------------------------
# reverse factorization


def test_reverse_identity_pair(rng):
    w = rand_weight(rng, 2)
    wbar, rep = reverse_factorize(w, w, 2.0, 2.0, 0.5)
    assert np.abs(wbar.cells - w.cells).max() <= 1e-10 * np.abs(w.cells).max()
    assert rep["bound_ratio"] <= 1.0 + 1e-8
    assert rep["q"] == pytest.approx(2.0)


def test_reverse_commuting_diagonals(rng):
    dom = DyadicDomain(n=1, origin=(0.0,), size=1.0, level=3)
    a = np.exp(rng.normal(size=8) * 0.3)
    b = np.exp(rng.normal(size=8) * 0.3)
    w0 = MatrixWeight(dom, np.array([np.diag([x, 2 * x]) for x in a]))
    w1 = MatrixWeight(dom, np.array([np.diag([y, 0.5 * y]) for y in b]))
    t = 0.4
    wbar, rep = reverse_factorize(w0, w1, 1.0, np.inf, t)
    expect = np.array(
        [np.diag([x ** (1 - t) * y**t, (2 * x) ** (1 - t) * (0.5 * y) ** t]) for x, y in zip(a, b)]
    )
    assert np.abs(wbar.cells - expect).max() <= 1e-10 * np.abs(expect).max()
    assert np.isfinite(rep["bound_ratio"])


def test_reverse_recovers_factorization(rng):
    w = rotating_weight(3)
    p = 2.0
    res = factorize(w, p)
    wbar, rep = reverse_factorize(res.w0, res.w1, 1.0, np.inf, 1.0 / conjugate(p))
    assert np.abs(wbar.cells - w.cells).max() <= 1e-10 * np.abs(w.cells).max()


def test_reverse_exponent_range():
    w = identity_weight(1)
    with pytest.raises(ExponentOutOfRange):
        reverse_factorize(w, w, 1.0, np.inf, 1.5)


# ---------------------------------------------------------------------------
# duo rescale


def test_duo_rescale_trivial_field():
    w = identity_weight(2)
    ones = np.ones(w.domain.num_cells)
    for p0 in (3.0, 4.0, np.inf):
        wbar, rep = duo_rescale(w, 2.0, ones, p0, "up")
        assert np.allclose(wbar.cells, w.cells)


def test_duo_rescale_up_branch(rng):
    w = rotating_weight(3)
    p, p0 = 2.0, 4.0
    res = factorize(w, p)
    s = res.rbar.cells ** -conjugate(p)  # W1 = s W in A_infty
    wbar, rep = duo_rescale(w, p, s, p0, "up")
    expect = s ** (1 - p / p0)
    ratios = wbar.cells / w.cells
    assert np.allclose(ratios[:, 0, 0], expect, rtol=1e-12)
    assert np.isfinite(rep.constant)


def test_duo_rescale_down_branch(rng):
    w = rotating_weight(3)
    p, p0 = 3.0, 2.0
    res = factorize(w, p)
    r = res.rbar.cells**p  # W0 = r W in A_1
    wbar, rep = duo_rescale(w, p, r, p0, "down")
    pp, pp0 = conjugate(p), conjugate(p0)
    expect = r ** (1 - pp / pp0)
    ratios = wbar.cells / w.cells
    assert np.allclose(ratios[:, 0, 0], expect, rtol=1e-12)


def test_duo_rescale_wrong_side():
    w = identity_weight(1)
    ones = np.ones(2)
    with pytest.raises(ExponentOutOfRange):
        duo_rescale(w, 2.0, ones, 4.0, "down")
    with pytest.raises(ExponentOutOfRange):
        duo_rescale(w, 2.0, ones, 1.5, "up")


# ---------------------------------------------------------------------------
# iteration-to-A1 link


def test_iteration_gives_a1k_field(rng):
    # SG from T = P_W: the ellipsoid field rbar W^{-1}B has its maximal
    # image absorbed within 2B, so its convex-set A1 constant is finite
    from mwlab.ap import a1k_constant
    from mwlab.bodies import Ellipsoid
    from mwlab.grid import SetFunction

    w = rotating_weight(3)
    dom = w.domain
    pw = op_PW(w)
    norm = l_norm(dom, 2.0)
    b0 = certify_bound(pw, norm, lambda: np.exp(rng.normal(size=8)), probes=16)
    g = np.exp(rng.normal(size=8))
    sg, b = iterate_scalar(pw, g, IterationConfig(bound=b0, k_max=30, p=2.0), norm)
    winv = w.inverse()
    field = SetFunction(dom, [Ellipsoid(sg[i] * winv.cells[i]) for i in range(8)])
    rep = a1k_constant(field)
    assert rep.constant <= 2.0 * b * (1.0 + 2.0**-26)
