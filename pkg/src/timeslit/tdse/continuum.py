"""Energy-normalized Coulomb continuum waves and momentum-space projection.

The radial wave for ``(k, l)`` is the solution of the *discretized* radial
equation ``(H_l - k^2/2) u = 0`` that vanishes at the origin.  Using the
discrete operator rather than an analytic Coulomb function keeps the
projection exactly consistent with the propagator's own dispersion, so
amplitudes do not drift during field-free evolution.  Amplitude and phase
are fixed by a least-squares fit to the WKB form

    u(r) = [alpha sin(Phi) + beta cos(Phi)] / sqrt(p(r))

on an outer matching window, where ``p`` is the local Langer-corrected
momentum and ``Phi`` its closed-form integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import eval_legendre, loggamma

from ..observables import MomentumMap
from .grid import RadialGrid
from .state import PartialWaveState

MATCH_WINDOW = (0.85, 0.95)
MIN_POINTS_PER_WAVELENGTH = 3.0
L_CONVERGENCE = 1e-4


class LConvergenceError(RuntimeError):
    """Partial-wave sum not converged; raise ``l_max``."""


def coulomb_phase_shift(l, k):
    """``arg Gamma(l + 1 + i eta)`` with ``eta = -1/k`` (attractive, Z = 1)."""
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0):
        raise ValueError("Coulomb phase shift needs k > 0")
    eta = -1.0 / k
    out = np.imag(loggamma(np.asarray(l) + 1.0 + 1j * eta))
    return float(out) if np.ndim(out) == 0 else out


def wkb_phase(r, k: float, l: int):
    """Langer-corrected WKB phase ``int p dr`` and local momentum ``p``.

    ``p^2 = k^2 + 2/r - (l + 1/2)^2 / r^2``.  Entries where ``p^2 <= 0``
    come back as ``nan``.
    """
    r = np.asarray(r, dtype=float)
    lam = l + 0.5
    q = k * k * r * r + 2.0 * r - lam * lam
    with np.errstate(invalid="ignore"):
        sq = np.sqrt(q)
        arg = (2.0 * r - 2.0 * lam * lam) / (r * math.sqrt(4.0 + 4.0 * k * k * lam * lam))
        phi = sq + np.log(2.0 * k * sq + 2.0 * k * k * r + 2.0) / k - lam * np.arcsin(np.clip(arg, -1, 1))
        p = sq / r
    bad = q <= 0
    phi = np.where(bad, np.nan, phi)
    p = np.where(bad, np.nan, p)
    return phi, p


def wkb_asymptotic_offset(k: float, l: int) -> float:
    """``lim (Phi(r) - k r - ln(2 k r)/k)`` as ``r -> inf``."""
    lam = l + 0.5
    return 1.0 / k + math.log(2.0 * k) / k - lam * math.atan(1.0 / (k * lam))


@dataclass
class ContinuumWave:
    """Normalized coefficients of one continuum wave plus its matching data."""

    k: float
    l: int
    coeffs: np.ndarray
    phase: float  # WKB-relative phase atan2(beta, alpha)
    fit_residual: float
    forbidden: bool = False

    def phase_shift(self) -> float:
        """Total asymptotic phase relative to ``k r + ln(2 k r)/k - l pi/2``, in ``(-pi, pi]``."""
        raw = self.phase + wkb_asymptotic_offset(self.k, self.l) + 0.5 * math.pi * self.l
        return float(math.remainder(raw, 2.0 * math.pi))


class _BandCache:
    def __init__(self, grid: RadialGrid):
        self.grid = grid
        self.bw = grid.bandwidth
        t = grid.kinetic.todia()
        self.kin = np.zeros((2 * self.bw + 1, grid.size))
        for off, diag in zip(t.offsets, t.data):
            self.kin[self.bw - off, :] = diag

    def band(self, l: int, energy: float) -> np.ndarray:
        ab = self.kin.copy()
        ab[self.bw] += self.grid.potential(l) - energy
        return ab


def continuum_waves(grid: RadialGrid, k: float, l: int, window=MATCH_WINDOW, _cache=None) -> ContinuumWave:
    """Energy-normalized regular continuum wave ``u_kl`` on ``grid``.

    The discrete radial equation is enforced on every point but the last,
    whose coefficient fixes the arbitrary scale; amplitude and phase then
    come from the WKB fit on ``window`` (fractions of ``r_max``).  Normalization
    is ``u ~ sqrt(2/(pi k)) sin(...)`` at large ``r``.  When the window is
    classically forbidden for this ``l`` the returned wave is zero and
    flagged, since such a wave carries no flux to the detector region.

    Raises
    ------
    ValueError
        ``"grid too coarse for k"`` when the matching window holds fewer than
        three points per local wavelength.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    r = grid.points
    sel = (r >= window[0] * grid.r_max) & (r <= window[1] * grid.r_max)
    rw = r[sel]
    phi, p = wkb_phase(rw, k, l)
    if np.any(np.isnan(phi)):
        return ContinuumWave(k, l, np.zeros(grid.size), 0.0, 0.0, forbidden=True)
    spacing = float(np.mean(np.diff(rw)))
    if 2.0 * math.pi / float(np.max(p)) < MIN_POINTS_PER_WAVELENGTH * spacing:
        raise ValueError(f"grid too coarse for k={k:g}")
    cache = _cache or _BandCache(grid)
    bw = cache.bw
    ab = cache.band(l, 0.5 * k * k)
    n = grid.size
    rhs = np.zeros(n - 1)
    # column n-1 of the banded matrix, rows n-1-bw .. n-2, moved to the right-hand side
    for d in range(1, bw + 1):
        rhs[n - 1 - d] = -ab[bw - d, n - 1]
    c = np.empty(n)
    c[-1] = 1.0
    c[:-1] = solve_banded((bw, bw), ab[:, :-1], rhs, check_finite=False)
    u = c / np.sqrt(grid.weights)
    basis = np.column_stack((np.sin(phi), np.cos(phi))) / np.sqrt(p)[:, None]
    (alpha, beta), *_ = np.linalg.lstsq(basis, u[sel], rcond=None)
    amp = math.hypot(alpha, beta)
    resid = float(np.linalg.norm(basis @ (alpha, beta) - u[sel]) / np.linalg.norm(u[sel]))
    scale = math.sqrt(2.0 / math.pi) / amp
    # regular solution is positive before its first node
    big = np.flatnonzero(np.abs(c) > 1e-8 * np.max(np.abs(c)))
    sign = 1.0 if c[big[0]] > 0 else -1.0
    phase = math.atan2(beta, alpha)
    if sign < 0:
        phase += math.pi
    return ContinuumWave(k, l, sign * scale * c, phase, resid)


def default_k_grid() -> np.ndarray:
    """``k = 0.01, 0.02, ..., 4.0``; reaches past the classical cutoff ``k = 3``."""
    return np.round(0.01 * np.arange(1, 401), 10)


@dataclass
class ContinuumProjection:
    """``amplitudes[i, l] = <k_i, l | psi>`` with energy-normalized waves."""

    k: np.ndarray
    amplitudes: np.ndarray
    phase_shifts: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def l_max(self) -> int:
        return self.amplitudes.shape[1] - 1

    def l_convergence(self, significance: float = 1e-3) -> float:
        """Worst ``|a_Lmax| / max_l |a_l|`` over momenta carrying weight.

        Momenta whose total ``sum_l |a_l|^2`` is below ``significance`` times
        the largest one are skipped (their ratios are noise).
        """
        mag = np.abs(self.amplitudes)
        dens = np.sum(mag**2, axis=1)
        keep = dens >= significance * np.max(dens) if dens.size and np.max(dens) > 0 else dens > 0
        if not np.any(keep):
            return 0.0
        return float(np.max(mag[keep, -1] / np.max(mag[keep], axis=1)))

    def check_l_convergence(self, tol: float = L_CONVERGENCE, significance: float = 1e-3) -> float:
        ratio = self.l_convergence(significance)
        if ratio >= tol:
            raise LConvergenceError(
                f"partial-wave sum not converged (|a_Lmax|/max|a_l| = {ratio:.2e}); increase l_max"
            )
        return ratio

    def partial_sums(self) -> np.ndarray:
        """``S[i, l] = (-i)^l e^{i delta_l} sqrt(2l+1) a_l``."""
        l = np.arange(self.l_max + 1)
        factor = (-1j) ** l * np.sqrt(2 * l + 1)
        return factor[None, :] * np.exp(1j * self.phase_shifts) * self.amplitudes

    def density(self, k_index: int, cos_theta) -> np.ndarray:
        """``dP/d^3k`` at grid momentum ``k[k_index]`` for the given angles."""
        ct = np.atleast_1d(np.asarray(cos_theta, dtype=float))
        pl = _legendre_table(self.l_max, ct)
        s = pl @ self.partial_sums()[k_index]
        return np.abs(s) ** 2 / (4.0 * math.pi * self.k[k_index])

    def energy_density(self) -> np.ndarray:
        """``dP/dE = sum_l |a_l|^2`` on the k grid."""
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)


def _legendre_table(l_max: int, x: np.ndarray) -> np.ndarray:
    """``P_l(x)`` for ``l = 0..l_max`` by upward recurrence, shape ``(x.size, l_max+1)``."""
    out = np.empty((x.size, l_max + 1))
    out[:, 0] = 1.0
    if l_max >= 1:
        out[:, 1] = x
    for l in range(1, l_max):
        out[:, l + 1] = ((2 * l + 1) * x * out[:, l] - l * out[:, l - 1]) / (l + 1)
    return out


def project_momentum(state: PartialWaveState, k_grid=None, l_max: int | None = None,
                     check: bool = True, l_tol: float = L_CONVERGENCE) -> ContinuumProjection:
    """Project ``state`` on the continuum waves ``|k, l>`` for every ``k`` in ``k_grid``.

    Raises
    ------
    LConvergenceError
        If ``check`` and ``|a_Lmax| / max_l |a_l|`` reaches ``l_tol``.
    """
    return project_states([state], k_grid, l_max, check, l_tol)[0]


def project_states(states, k_grid=None, l_max: int | None = None, check: bool = True,
                   l_tol: float = L_CONVERGENCE) -> list:
    """:func:`project_momentum` for several states on one grid, building each wave once."""
    states = list(states)
    if not states:
        raise ValueError("no states to project")
    grid = states[0].grid
    if any(s.grid is not grid and s.grid.fingerprint != grid.fingerprint for s in states):
        raise ValueError("all states must share one radial grid")
    k_grid = default_k_grid() if k_grid is None else np.asarray(k_grid, dtype=float)
    if k_grid.ndim != 1 or k_grid.size == 0:
        raise ValueError("k grid must be a non-empty 1-d array")
    if np.any(np.diff(k_grid) <= 0) or k_grid[0] <= 0:
        raise ValueError("k grid must be positive and strictly increasing")
    top = max(s.l_max for s in states)
    l_max = top if l_max is None else min(int(l_max), top)
    cache = _BandCache(grid)
    amps = np.zeros((len(states), k_grid.size, l_max + 1), dtype=complex)
    forbidden = 0
    worst_fit = 0.0
    for l in range(l_max + 1):
        psi = np.array([s.coeffs[l] if l <= s.l_max else np.zeros(grid.size) for s in states])
        if not np.any(psi):
            continue
        for i, k in enumerate(k_grid):
            wave = continuum_waves(grid, float(k), l, _cache=cache)
            if wave.forbidden:
                forbidden += 1
                continue
            worst_fit = max(worst_fit, wave.fit_residual)
            amps[:, i, l] = psi @ wave.coeffs
    ls = np.arange(l_max + 1)
    shifts = np.asarray(coulomb_phase_shift(ls[None, :], k_grid[:, None]))
    out = []
    for s, a in zip(states, amps):
        meta = {k: v for k, v in s.meta.items() if np.isscalar(v)}
        meta.update(time=s.time, l_max=l_max, forbidden_waves=forbidden, worst_fit_residual=worst_fit)
        proj = ContinuumProjection(k_grid.copy(), a, shifts, meta)
        proj.meta["l_convergence"] = proj.l_convergence()
        if check:
            proj.check_l_convergence(l_tol)
        out.append(proj)
    return out


def momentum_map_from_projection(proj: ContinuumProjection, kz_axis=None, krho_axis=None) -> MomentumMap:
    """``d^2P/(dk_z dk_rho) = 2 pi k_rho dP/d^3k`` on a cylindrical grid.

    ``|S(k, theta)|^2`` is evaluated at the exact angle of each grid point on
    the two neighbouring projection momenta and interpolated linearly in
    ``k``.  Points outside the projected ``k`` range get zero density.  The
    default step 0.005 keeps the trapezoid total within 1e-3 of the
    projected probability for the reference pulses.
    """
    if kz_axis is None:
        kz_axis = np.round(0.005 * np.arange(-800, 801), 10)
    if krho_axis is None:
        krho_axis = np.round(0.005 * np.arange(0, 401), 10)
    kz_axis = np.asarray(kz_axis, dtype=float)
    krho_axis = np.asarray(krho_axis, dtype=float)
    kz, kr = np.meshgrid(kz_axis, krho_axis, indexing="ij")
    kk = np.hypot(kz, kr).ravel()
    out = np.zeros(kk.size)
    kg = proj.k
    inside = (kk >= kg[0]) & (kk <= kg[-1])
    idx = np.flatnonzero(inside)
    s = proj.partial_sums()
    for chunk in np.array_split(idx, max(1, idx.size // 8192)):
        if chunk.size == 0:
            continue
        ct = kz.ravel()[chunk] / kk[chunk]
        j = np.clip(np.searchsorted(kg, kk[chunk]) - 1, 0, kg.size - 2)
        frac = (kk[chunk] - kg[j]) / (kg[j + 1] - kg[j])
        pl = _legendre_table(proj.l_max, ct)
        lo = np.abs(np.einsum("pl,pl->p", pl, s[j])) ** 2 / (4 * math.pi * kg[j])
        hi = np.abs(np.einsum("pl,pl->p", pl, s[j + 1])) ** 2 / (4 * math.pi * kg[j + 1])
        out[chunk] = (1 - frac) * lo + frac * hi
    dens = 2.0 * math.pi * kr * out.reshape(kz.shape)
    meta = {"engine": "tdse", **{k: v for k, v in proj.meta.items() if np.isscalar(v)}}
    return MomentumMap(kz_axis, krho_axis, dens, meta)
