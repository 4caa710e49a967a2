"""Two-slit strong-field approximation for a one-cycle flat pulse.

Each final momentum ``k`` is reached by two trajectories released in the
first and second half cycle.  Their complex release times solve
``[k + A(t)]^2 / 2 + Ip = 0`` and satisfy ``omega (t1 + t2) = 2 pi``.  The
momentum density factorizes into a tunnelling envelope ``B(k)`` evaluated at
the real (Simple Man) release time and a two-path interference factor
controlled by the action difference ``dS(k)`` between the real release times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classical import classical_support
from .observables import MomentumMap, SpectrumGrid
from .pulse import PulseParams, field_at, vector_potential

HYDROGEN_IP = 0.5

# |F| below this counts as a release at a field node
FIELD_ZERO = 1e-12


class OutsideSupportError(ValueError):
    pass


@dataclass(frozen=True)
class MomentumPoint:
    """Final momentum in cylindrical coordinates (``krho >= 0``)."""

    kz: float
    krho: float = 0.0

    def __post_init__(self):
        if self.krho < 0:
            raise ValueError("krho must be non-negative")

    @classmethod
    def from_energy_angle(cls, energy: float, cos_theta: float) -> "MomentumPoint":
        k = math.sqrt(2.0 * energy)
        sin_theta = math.sqrt(max(0.0, 1.0 - cos_theta**2))
        return cls(k * cos_theta, k * sin_theta)

    @property
    def k(self) -> float:
        return math.hypot(self.kz, self.krho)

    @property
    def energy(self) -> float:
        return 0.5 * (self.kz**2 + self.krho**2)

    @property
    def cos_theta(self) -> float:
        k = self.k
        return self.kz / k if k > 0 else 1.0


@dataclass(frozen=True)
class SaddlePair:
    """Complex stationary-phase times of the two interfering trajectories."""

    t1: complex
    t2: complex
    ip: float = HYDROGEN_IP


@dataclass(frozen=True)
class SfaAmplitude:
    envelope_b: np.ndarray
    phase_delta_s: np.ndarray
    density: np.ndarray


def _check_one_cycle_flat(p: PulseParams):
    if not p.is_flat:
        raise ValueError("analytic saddle requires flat envelope")
    if abs(p.tau * p.omega - 2.0 * math.pi) > 1e-9 * 2.0 * math.pi:
        raise ValueError("two-slit model requires a one-cycle pulse (tau = 2 pi / omega)")


# relative slack on the support edges so that kz = 2 f0/omega itself is inside
SUPPORT_RTOL = 1e-12


def _support_max(p: PulseParams) -> float:
    return classical_support(p, 2).p_max


def _inside_closed_support(p: PulseParams, kz):
    kmax = _support_max(p)
    slack = SUPPORT_RTOL * kmax
    return (kz >= -slack) & (kz <= kmax + slack)


def _asarrays(kz, krho):
    kz = np.asarray(kz, dtype=float)
    krho = np.asarray(krho, dtype=float)
    if np.any(krho < 0):
        raise ValueError("krho must be non-negative")
    return np.broadcast_arrays(kz, krho)


def _finish(x, *like):
    if all(np.ndim(v) == 0 for v in like):
        return x.item() if isinstance(x, np.ndarray) else x
    return x


def vector_potential_complex(p: PulseParams, t):
    """Flat-envelope ``A(t)`` continued to complex times (no clamping)."""
    return p.quiver_momentum * (np.cos(p.omega * np.asarray(t)) - 1.0)


def saddle_residual(p: PulseParams, kz, krho, ip, t):
    """Left-hand side of the stationary-phase equation at complex time ``t``."""
    v = np.asarray(kz) + vector_potential_complex(p, t)
    return 0.5 * (v * v + np.asarray(krho) ** 2) + ip


def saddle_times(p: PulseParams, kz, krho=0.0, ip: float = HYDROGEN_IP) -> SaddlePair:
    """Both complex saddle times for momentum ``(kz, krho)``.

    The first time is taken on the branch with ``Im(t1) > 0``, i.e.
    ``omega t1 = arccos[1 - (kz + i kappa) omega / f0]`` with
    ``kappa = sqrt(2 Ip + krho^2)``; the second is ``2 pi / omega - t1``.

    Raises
    ------
    ValueError
        For non-flat or non-one-cycle pulses, and for ``kz`` outside the open
        interval ``(0, 2 f0 / omega)`` (``OutsideSupportError``).
    """
    _check_one_cycle_flat(p)
    kz_a, krho_a = _asarrays(kz, krho)
    if np.any(kz_a <= 0.0) or np.any(kz_a >= _support_max(p)):
        raise OutsideSupportError("outside classical support")
    kappa = np.sqrt(2.0 * ip + krho_a**2)
    arg = 1.0 - (kz_a + 1j * kappa) / p.quiver_momentum
    wt1 = np.arccos(arg)
    t1 = wt1 / p.omega
    t2 = 2.0 * math.pi / p.omega - t1
    return SaddlePair(_finish(t1, kz, krho), _finish(t2, kz, krho), ip)


def release_times(p: PulseParams, kz):
    """Real release times ``t1 <= t2`` with ``cos(omega t) = 1 - kz omega / f0``.

    Defined on the closed support ``0 <= kz <= 2 f0 / omega``.
    """
    _check_one_cycle_flat(p)
    kz_a = np.asarray(kz, dtype=float)
    if not np.all(_inside_closed_support(p, kz_a)):
        raise OutsideSupportError("outside classical support")
    cos_wt = np.clip(1.0 - kz_a / p.quiver_momentum, -1.0, 1.0)
    t1 = np.arccos(cos_wt) / p.omega
    t2 = 2.0 * math.pi / p.omega - t1
    return _finish(t1, kz), _finish(t2, kz)


def _action_antiderivative(p: PulseParams, kz, krho, ip, t):
    """Continuous antiderivative of ``(k + A)^2/2 + Ip`` over the whole time axis."""
    w = p.omega
    c = p.quiver_momentum
    a = kz - c
    base = 0.5 * krho**2 + ip

    def inside(s):
        return (base + 0.5 * a * a + 0.25 * c * c) * s + (a * c / w) * np.sin(w * s) + (
            c * c / (8.0 * w)
        ) * np.sin(2.0 * w * s)

    before = (base + 0.5 * kz**2) * t
    a_end = vector_potential(p, p.tau)
    after = inside(p.tau) + (base + 0.5 * (kz + a_end) ** 2) * (t - p.tau)
    return np.where(t < 0.0, before, np.where(t > p.tau, after, inside(np.clip(t, 0.0, p.tau))))


def volkov_action(p: PulseParams, kz, krho, ip, t_from, t_to):
    """Volkov action ``S = -int_{t_from}^{t_to} [(k + A)^2/2 + Ip] dt``.

    Closed form for the flat envelope; valid for any real limits (the vector
    potential is zero before and constant after the pulse).
    """
    if not p.is_flat:
        raise ValueError("closed-form action requires flat envelope")
    kz_a, krho_a = _asarrays(kz, krho)
    t0 = np.asarray(t_from, dtype=float)
    t1 = np.asarray(t_to, dtype=float)
    if np.any(t1 < t0):
        raise ValueError("t_to < t_from: the action uses the signed interval t_from -> t_to")
    out = -(
        _action_antiderivative(p, kz_a, krho_a, ip, t1)
        - _action_antiderivative(p, kz_a, krho_a, ip, t0)
    )
    return _finish(out, kz, krho, t_from, t_to)


def interference_phase(p: PulseParams, kz, krho=0.0, ip: float = HYDROGEN_IP):
    """Action difference ``dS = S(t2, T) - S(t1, T)`` between the two real release times.

    ``T = 2 pi / omega`` is the end of the pulse; ``dS`` reduces to
    ``int_{t1}^{t2} [(k + A)^2/2 + Ip] dt`` and is independent of ``T``.
    """
    kz_a, krho_a = _asarrays(kz, krho)
    t1, t2 = release_times(p, kz_a)
    end = 2.0 * math.pi / p.omega
    ds = volkov_action(p, kz_a, krho_a, ip, t2, end) - volkov_action(p, kz_a, krho_a, ip, t1, end)
    return _finish(np.asarray(ds), kz, krho)


def _envelope_unchecked(p, kz, krho, ip):
    t1, _ = release_times(p, kz)
    field = np.abs(field_at(p, np.asarray(t1)))
    kappa2 = 2.0 * ip + krho**2
    safe = np.where(field < FIELD_ZERO, 1.0, field)
    b = math.pi**2 / (2.0 * kappa2 * safe**2) * np.exp(-2.0 * kappa2**1.5 / (3.0 * safe))
    return np.where(field < FIELD_ZERO, 0.0, b), field


def ionization_envelope(p: PulseParams, kz, krho=0.0, ip: float = HYDROGEN_IP):
    """Tunnelling envelope ``B(k)`` at the real release time.

    ``B = pi^2 / [2 kappa^2 |F|^2] exp(-2 kappa^3 / (3 |F|))`` with
    ``kappa^2 = 2 Ip + krho^2`` and ``|F|`` the field at release.  Both
    release times of a pair see the same ``|F|``.
    """
    kz_a, krho_a = _asarrays(kz, krho)
    b, field = _envelope_unchecked(p, kz_a, krho_a, ip)
    if np.any(field < FIELD_ZERO):
        raise ValueError("release at field zero")
    return _finish(b, kz, krho)


def interference_factor(delta_s):
    """Two equal-weight paths with action difference ``dS``: ``cos^2(dS / 2)``."""
    return np.cos(0.5 * np.asarray(delta_s)) ** 2


def sfa_amplitude(p: PulseParams, kz, krho=0.0, ip: float = HYDROGEN_IP) -> SfaAmplitude:
    """Envelope, action difference and density on the closed classical support."""
    kz_a, krho_a = _asarrays(kz, krho)
    b, _ = _envelope_unchecked(p, kz_a, krho_a, ip)
    ds = interference_phase(p, kz_a, krho_a, ip)
    return SfaAmplitude(b, ds, b * interference_factor(ds))


def sfa_density(p: PulseParams, kz, krho=0.0, ip: float = HYDROGEN_IP):
    """Momentum density ``|b(k)|^2`` on the classical domain, exactly zero elsewhere.

    The domain is ``0 <= kz <= 2 f0/omega`` together with the energy cap
    ``E <= 2 (f0/omega)^2``; both come from drift momenta of electrons born
    at rest.
    """
    _check_one_cycle_flat(p)
    kz_a, krho_a = _asarrays(kz, krho)
    kmax = _support_max(p)
    inside = _inside_closed_support(p, kz_a) & (
        kz_a * kz_a + krho_a * krho_a <= (kmax * (1.0 + SUPPORT_RTOL)) ** 2
    )
    out = np.zeros(kz_a.shape)
    if np.any(inside):
        out[inside] = sfa_amplitude(p, kz_a[inside], krho_a[inside], ip).density
    return _finish(out, kz, krho)


def sfa_spectrum(
    p: PulseParams, ip: float = HYDROGEN_IP, e_grid=None, n_angles: int = 256
) -> SpectrumGrid:
    """Photoelectron spectrum ``dP/dE = 2 pi int dcos(theta) sqrt(2E) |b|^2``.

    The angular integral runs over the forward hemisphere with an
    ``n_angles``-point Gauss-Legendre rule in the polar angle; energies above
    ``2 (f0/omega)^2`` lie outside the classical domain and get zero.
    """
    _check_one_cycle_flat(p)
    if e_grid is None:
        e_grid = default_energy_grid()
    e = np.asarray(e_grid, dtype=float)
    if e.size == 0:
        raise ValueError("empty energy grid")
    if np.any(e <= 0):
        raise ValueError("energy grid must be positive")
    if n_angles < 200:
        raise ValueError("n_angles must be at least 200")
    nodes, weights = np.polynomial.legendre.leggauss(n_angles)
    k = np.sqrt(2.0 * e)
    theta_lo = np.zeros_like(k)
    theta_hi = 0.5 * math.pi
    half = 0.5 * (theta_hi - theta_lo)
    theta = theta_lo[:, None] + half[:, None] * (nodes[None, :] + 1.0)
    kz = k[:, None] * np.cos(theta)
    krho = k[:, None] * np.sin(theta)
    dens = sfa_density(p, kz, krho, ip)
    integrand = dens * np.sin(theta)
    values = 2.0 * math.pi * k * half * (integrand @ weights)
    values = np.maximum(values, 0.0)
    return SpectrumGrid(
        e, values, {"engine": "sfa", "quantity": "dP/dE", "ip": ip, **p.as_dict()}
    )


def sfa_momentum_map(p: PulseParams, ip: float = HYDROGEN_IP, kz_axis=None, krho_axis=None) -> MomentumMap:
    """Cylindrical map ``d2P/(dkz dkrho) = 2 pi krho |b(k)|^2``."""
    if kz_axis is None or krho_axis is None:
        dkz, dkrho = default_momentum_axes()
        kz_axis = dkz if kz_axis is None else kz_axis
        krho_axis = dkrho if krho_axis is None else krho_axis
    kz_axis = np.asarray(kz_axis, dtype=float)
    krho_axis = np.asarray(krho_axis, dtype=float)
    kz, krho = np.meshgrid(kz_axis, krho_axis, indexing="ij")
    dens = sfa_density(p, kz, krho, ip)
    return MomentumMap(
        kz_axis,
        krho_axis,
        2.0 * math.pi * krho * dens,
        {"engine": "sfa", "quantity": "d2P/dkz dkrho", "ip": ip, **p.as_dict()},
    )


def default_energy_grid(e_max: float = 4.6, step: float = 0.002) -> np.ndarray:
    n = int(round(e_max / step))
    return step * np.arange(1, n + 1)


def default_momentum_axes():
    kz = np.round(np.arange(-100, 351) * 0.01, 10)
    krho = np.round(np.arange(0, 101) * 0.01, 10)
    return kz, krho
