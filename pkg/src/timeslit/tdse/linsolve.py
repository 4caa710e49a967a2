"""Solver for ``(I + beta H_l) x = b`` on all partial waves at once.

Interior points of an element couple only to that element and its two
bridge points, so they are eliminated element by element (static
condensation).  What remains is a tridiagonal system on the bridge points,
factorized once with LAPACK ``gttrf``.  ``beta = i dt / 2`` gives the
Crank-Nicolson propagator, a real ``beta`` its imaginary-time counterpart.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import lapack

from .grid import RadialGrid


class CondensedSolver:
    def __init__(self, grid: RadialGrid, ls, beta: complex):
        self.grid = grid
        self.ls = np.asarray(ls, dtype=int)
        self.beta = complex(beta)
        n, ne = grid.order, grid.n_elements
        if ne < 2:
            raise ValueError("need at least two elements")
        m = n - 2
        te = grid.element_kinetic
        r = grid.padded_points
        ell = self.ls[:, None]
        with np.errstate(divide="ignore"):
            v = np.where(r > 0, -1.0 / r + 0.5 * ell * (ell + 1) / np.where(r > 0, r, 1.0) ** 2, 0.0)
        nl = self.ls.size
        b = self.beta

        v_el = v[:, :-1].reshape(nl, ne, n - 1)
        v_int = v_el[:, :, 1:]  # (nl, ne, m)
        v_bridge = v_el[:, 1:, 0]  # (nl, ne-1)

        a_ii = b * np.broadcast_to(te[:, 1:-1, 1:-1], (nl, ne, m, m)).copy()
        diag = np.arange(m)
        a_ii[:, :, diag, diag] += 1.0 + b * v_int
        a_inv = np.linalg.inv(a_ii)
        a_l = b * te[:, 1:-1, 0]  # (ne, m): interior <-> left end
        a_r = b * te[:, 1:-1, -1]
        w_l = np.einsum("leij,ej->lei", a_inv, a_l)
        w_r = np.einsum("leij,ej->lei", a_inv, a_r)

        # Schur complement on bridges 1..ne-1
        s_diag = 1.0 + b * (te[:-1, -1, -1] + te[1:, 0, 0])[None, :] + b * v_bridge
        s_diag = s_diag - np.einsum("ej,lej->le", a_r[:-1], w_r[:, :-1]) - np.einsum(
            "ej,lej->le", a_l[1:], w_l[:, 1:]
        )
        s_off = b * te[1:-1, 0, -1][None, :] - np.einsum("ej,lej->le", a_l[1:-1], w_r[:, 1:-1])

        nb = ne - 1
        d = s_diag.reshape(-1)
        off = np.zeros((nl, nb), dtype=complex)
        off[:, :-1] = s_off
        du = off.reshape(-1)[:-1].copy()
        dl = du.copy()
        dl_f, d_f, du_f, du2, ipiv, info = lapack.zgttrf(dl, d, du)
        if info != 0:
            raise np.linalg.LinAlgError(f"bridge factorization failed (info={info})")
        self._tri = (dl_f, d_f, du_f, du2, ipiv)
        self._a_inv = a_inv
        self._a_l = a_l
        self._a_r = a_r
        self._w_l = w_l
        self._w_r = w_r
        self._shape = (nl, ne, n, nb)

    def solve_padded(self, rhs: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """Solve for a padded right-hand side of shape ``(n_l, n_padded)``.

        The boundary entries of ``rhs`` are ignored and those of the result
        are zero.
        """
        nl, ne, n, nb = self._shape
        blocks = rhs[:, :-1].reshape(nl, ne, n - 1)
        f_int = blocks[:, :, 1:]
        f_bridge = blocks[:, 1:, 0]
        y = np.matmul(self._a_inv, f_int[..., None])[..., 0]
        dot_r = np.einsum("ej,lej->le", self._a_r, y)
        dot_l = np.einsum("ej,lej->le", self._a_l, y)
        g = f_bridge - dot_r[:, :-1] - dot_l[:, 1:]
        xb = _gttrs(self._tri, g.reshape(-1)).reshape(nl, nb)
        if out is None:
            out = np.zeros_like(rhs, dtype=complex)
        oblocks = out[:, :-1].reshape(nl, ne, n - 1)
        x_int = y
        x_int[:, 1:, :] -= self._w_l[:, 1:, :] * xb[:, :, None]
        x_int[:, :-1, :] -= self._w_r[:, :-1, :] * xb[:, :, None]
        oblocks[:, :, 1:] = x_int
        oblocks[:, 1:, 0] = xb
        oblocks[:, 0, 0] = 0.0
        out[:, -1] = 0.0
        return out


def _gttrs(tri, b):
    dl, d, du, du2, ipiv = tri
    x, info = lapack.zgttrs(dl, d, du, du2, ipiv, b)
    if info != 0:
        raise np.linalg.LinAlgError(f"bridge solve failed (info={info})")
    return x
