"""Deterministic unit-direction grids on the sphere, closed under negation."""

from dataclasses import dataclass

import numpy as np

DEFAULT_N_2D = 256
DEFAULT_N_3D = 1026


@dataclass(frozen=True)
class DirectionGrid:
    """An ordered, symmetric set of unit directions in R^d.

    Directions come in exact +/- pairs: index i and i + N/2 negate each
    other, so downstream code may rely on ``dirs[i + N // 2] == -dirs[i]``
    bit for bit.
    """

    dim: int
    dirs: np.ndarray  # (N, dim), rows unit within 1e-14

    def __post_init__(self):
        self.dirs.setflags(write=False)

    def __len__(self):
        return self.dirs.shape[0]

    @property
    def name(self):
        return f"canonical-{len(self)}"

    def negation_index(self, i):
        n = len(self)
        return (i + n // 2) % n


def _half_sphere_3d(m):
    # Fibonacci lattice on the upper half sphere; deterministic.
    golden = (1.0 + np.sqrt(5.0)) / 2.0
    k = np.arange(m)
    z = (k + 0.5) / m  # z in (0, 1): strictly upper half, no equator ties
    phi = 2.0 * np.pi * ((k / golden) % 1.0)
    r = np.sqrt(1.0 - z * z)
    pts = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    return pts / np.linalg.norm(pts, axis=1)[:, None]


def canonical_grid(dim, n=None):
    """Build the canonical direction grid for dimension ``dim``.

    d=2 uses equally spaced angles; d>=3 mirrors a deterministic
    low-discrepancy half-sphere point set.
    """
    if dim == 1:
        half = np.array([[1.0]])
    elif dim == 2:
        n = DEFAULT_N_2D if n is None else int(n)
        if n % 2:
            raise ValueError("direction count must be even")
        theta = 2.0 * np.pi * np.arange(n // 2) / n
        half = np.column_stack([np.cos(theta), np.sin(theta)])
    elif dim == 3:
        n = DEFAULT_N_3D if n is None else int(n)
        if n % 2:
            raise ValueError("direction count must be even")
        half = _half_sphere_3d(n // 2)
    else:
        raise ValueError(f"unsupported dimension {dim}")
    dirs = np.vstack([half, -half])  # exact negation pairing by construction
    return DirectionGrid(dim=dim, dirs=dirs)
