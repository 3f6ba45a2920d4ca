"""Shared test helpers: random generators and independent oracles."""

import numpy as np
import pytest
from scipy.optimize import minimize

from mwlab.bodies import SymPolygon
from mwlab.grid import DyadicDomain, MatrixWeight


def rand_spd(rng, d=2, spread=1.0, floor=0.25):
    a = rng.normal(size=(d, d)) * spread
    m = a @ a.T + floor * np.eye(d)
    return 0.5 * (m + m.T)


def rand_weight(rng, level=3, spread=0.8, n=1):
    dom = DyadicDomain(n=n, origin=(0.0,) * n, size=1.0, level=level)
    cells = np.array([rand_spd(rng, 2, spread) for _ in range(dom.num_cells)])
    return MatrixWeight(dom, cells)


def rand_polygon(rng, k=3, scale_spread=0.5):
    return SymPolygon(rng.normal(size=(k, 2)) * np.exp(rng.normal() * scale_spread))


def john_logdet_oracle(poly, grid_n=64, seeds=12):
    """Brute-force maximal inscribed-ellipse log-volume.

    Grid over (angle, log axis-ratio) with the closed-form optimal scale,
    polished by simplex descent from the best grid seeds; independent of
    the barrier solver.
    """
    n, c = poly.facets()
    nn = n / np.linalg.norm(n, axis=1)[:, None]
    cc = c / np.linalg.norm(n, axis=1)

    def val(x):
        theta, logrho = x
        rho = np.exp(logrho)
        ct, st = np.cos(theta), np.sin(theta)
        m00 = ct * ct + rho * st * st
        m01 = (1 - rho) * ct * st
        m11 = st * st + rho * ct * ct
        v0 = m00 * nn[:, 0] + m01 * nn[:, 1]
        v1 = m01 * nn[:, 0] + m11 * nn[:, 1]
        s = np.min(cc / np.sqrt(v0 * v0 + v1 * v1))
        return 2.0 * np.log(s) + logrho

    ts = np.linspace(0, np.pi, grid_n, endpoint=False)
    rs = np.linspace(-5, 5, grid_n)
    vals = np.array([[val((t, r)) for r in rs] for t in ts])
    order = np.argsort(vals.ravel())[::-1][:seeds]
    best = -np.inf
    for k in order:
        x0 = np.array([ts[k // grid_n], rs[k % grid_n]])
        res = minimize(
            lambda x: -val(x),
            x0,
            method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-13, "maxiter": 2000},
        )
        best = max(best, -res.fun)
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
