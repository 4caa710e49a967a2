"""Finite-element discrete-variable radial grid.

The radial axis ``[0, r_max]`` is split into elements, each carrying an
``order``-point Gauss-Lobatto-Legendre rule.  Neighbouring elements share
their end points ("bridge" points).  Elements are small near the nucleus and
grow geometrically up to ``h_max``, which resolves the Coulomb cusp region
while keeping the outer region cheap.  Functions are stored as
``c_i = sqrt(w_i) u(r_i)`` so that the discrete inner product is the plain
Euclidean one and all Hamiltonian blocks are real symmetric.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import legendre
from scipy import sparse


def gll_rule(n: int):
    """Gauss-Lobatto-Legendre nodes and weights on ``[-1, 1]``."""
    if n < 3:
        raise ValueError("need at least 3 Lobatto points")
    pn1 = legendre.Legendre.basis(n - 1)
    inner = np.sort(pn1.deriv().roots().real)
    x = np.concatenate(([-1.0], inner, [1.0]))
    w = 2.0 / (n * (n - 1) * pn1(x) ** 2)
    return x, w


def lagrange_derivatives(x: np.ndarray) -> np.ndarray:
    """``D[i, j] = l_j'(x_i)`` for the Lagrange basis on nodes ``x``."""
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    bary = 1.0 / np.prod(diff, axis=1)
    d = (bary[None, :] / bary[:, None]) / diff
    np.fill_diagonal(d, 0.0)
    np.fill_diagonal(d, -d.sum(axis=1))
    return d


def graded_edges(r_max: float, h_max: float, h_min: float = 0.4, growth: float = 1.25) -> np.ndarray:
    """Element boundaries growing geometrically from ``h_min`` to ``h_max``."""
    if not 0 < h_min <= h_max < r_max:
        raise ValueError("need 0 < h_min <= h_max < r_max")
    edges = [0.0]
    h = h_min
    while edges[-1] + h < r_max:
        edges.append(edges[-1] + h)
        h = min(h * growth, h_max)
    tail = r_max - edges[-1]
    if tail < 0.5 * h and len(edges) > 1:
        edges[-1] = r_max
    else:
        edges.append(r_max)
    return np.asarray(edges)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """FE-DVR grid; ``points`` and ``weights`` exclude ``r = 0`` and ``r = r_max``.

    Both end points carry the boundary condition ``u = 0`` and are only
    present in the *padded* layout used internally by the propagator.
    """

    edges: np.ndarray
    order: int

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        if edges[0] != 0.0 or np.any(np.diff(edges) <= 0):
            raise ValueError("edges must start at 0 and increase strictly")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def default(cls, r_max: float = 1200.0, order: int = 11, h_max: float = 4.0,
                h_min: float = 0.4, growth: float = 1.25) -> "RadialGrid":
        return cls(graded_edges(r_max, h_max, h_min, growth), order)

    @property
    def n_elements(self) -> int:
        return self.edges.size - 1

    @property
    def r_max(self) -> float:
        return float(self.edges[-1])

    @property
    def n_padded(self) -> int:
        return self.n_elements * (self.order - 1) + 1

    @cached_property
    def _padded(self):
        x, w = gll_rule(self.order)
        ne, n = self.n_elements, self.order
        r = np.zeros(self.n_padded)
        wt = np.zeros(self.n_padded)
        half = 0.5 * np.diff(self.edges)
        for e in range(ne):
            idx = e * (n - 1) + np.arange(n)
            r[idx] = self.edges[e] + half[e] * (x + 1.0)
            wt[idx] += half[e] * w
        return r, wt

    @property
    def padded_points(self) -> np.ndarray:
        return self._padded[0]

    @property
    def padded_weights(self) -> np.ndarray:
        return self._padded[1]

    @property
    def points(self) -> np.ndarray:
        return self._padded[0][1:-1]

    @property
    def weights(self) -> np.ndarray:
        return self._padded[1][1:-1]

    @property
    def size(self) -> int:
        return self.n_padded - 2

    @property
    def bandwidth(self) -> int:
        return self.order - 1

    def integrate(self, values) -> float:
        """Quadrature ``int_0^r_max f(r) dr`` from samples at ``points``."""
        return float(np.sum(self.weights * np.asarray(values)))

    @cached_property
    def element_kinetic(self) -> np.ndarray:
        """Per-element kinetic blocks in the normalized basis, shape ``(ne, n, n)``.

        The global kinetic matrix is the overlapping sum of these blocks
        (bridge points receive contributions from both neighbours).
        """
        x, w = gll_rule(self.order)
        d = lagrange_derivatives(x)
        ref = 0.5 * (d.T * w) @ d  # 1/2 int l_i' l_j' on [-1, 1]
        ne, n = self.n_elements, self.order
        half = 0.5 * np.diff(self.edges)
        wpad = self.padded_weights
        idx = (np.arange(ne) * (n - 1))[:, None] + np.arange(n)[None, :]
        s = 1.0 / np.sqrt(wpad[idx])
        return ref[None, :, :] / half[:, None, None] * s[:, :, None] * s[:, None, :]

    @cached_property
    def kinetic(self) -> sparse.csr_matrix:
        """Kinetic energy ``-1/2 d^2/dr^2`` on the inner points (sparse, symmetric)."""
        ne, n = self.n_elements, self.order
        idx = (np.arange(ne) * (n - 1))[:, None] + np.arange(n)[None, :]
        rows = np.repeat(idx, n, axis=1).ravel()
        cols = np.tile(idx, (1, n)).ravel()
        t = sparse.coo_matrix(
            (self.element_kinetic.ravel(), (rows, cols)), shape=(self.n_padded, self.n_padded)
        ).tocsr()
        return t[1:-1, 1:-1].tocsr()

    def potential(self, l: int, charge: float = 1.0) -> np.ndarray:
        r = self.points
        return -charge / r + 0.5 * l * (l + 1) / r**2

    def hamiltonian(self, l: int) -> sparse.csr_matrix:
        """Field-free radial Hamiltonian for angular momentum ``l``."""
        return (self.kinetic + sparse.diags(self.potential(l))).tocsr()

    def hamiltonian_banded(self, l: int, shift: float = 0.0) -> np.ndarray:
        """``H_l - shift`` in LAPACK general band storage ``(2 bw + 1, size)``."""
        bw = self.bandwidth
        h = (self.hamiltonian(l) - shift * sparse.identity(self.size)).todia()
        ab = np.zeros((2 * bw + 1, self.size))
        for off, diag in zip(h.offsets, h.data):
            ab[bw - off, :] = diag
        return ab

    def to_coefficients(self, u) -> np.ndarray:
        """Samples ``u(r_i)`` -> normalized-basis coefficients."""
        return np.sqrt(self.weights) * np.asarray(u)

    def to_values(self, c) -> np.ndarray:
        return np.asarray(c) / np.sqrt(self.weights)

    @cached_property
    def fingerprint(self) -> bytes:
        h = hashlib.sha256()
        h.update(np.int64(self.order).tobytes())
        h.update(np.ascontiguousarray(self.edges, dtype="<f8").tobytes())
        return h.digest()

    def describe(self) -> dict:
        return {
            "kind": "fedvr",
            "r_max": self.r_max,
            "order": self.order,
            "n_elements": self.n_elements,
            "n_points": self.size,
            "first_point": float(self.points[0]),
            "max_element": float(np.max(np.diff(self.edges))),
            "fingerprint": self.fingerprint.hex(),
        }
