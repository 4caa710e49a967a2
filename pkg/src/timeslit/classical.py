"""Simple Man's Model for direct electrons.

An electron released at ``t0`` with zero velocity and driven only by the
laser field ends up with longitudinal momentum ``A(t) - A(t0)``.  For the flat
envelope this is ``(f0/omega)(cos wt - cos wt0)``.  Rescattered trajectories
are not modelled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pulse import PulseParams, vector_potential


@dataclass(frozen=True)
class ReleaseEvent:
    """A classical release at ``t0`` and the momentum it ends with."""

    t0: float
    p_final: float

    @classmethod
    def at(cls, p: PulseParams, t0: float) -> "ReleaseEvent":
        if not 0.0 <= t0 <= p.tau:
            raise ValueError(f"release time {t0} outside [0, {p.tau}]")
        return cls(float(t0), float(final_momentum(p, t0)))


@dataclass(frozen=True)
class ClassicalSupport:
    """Interval of final longitudinal momenta reachable by direct electrons."""

    p_min: float
    p_max: float
    e_max: float

    def __iter__(self):
        yield self.p_min
        yield self.p_max

    def contains(self, kz) -> np.ndarray:
        kz = np.asarray(kz, dtype=float)
        return (kz >= self.p_min) & (kz <= self.p_max)


def _require_flat(p: PulseParams, what: str):
    if not p.is_flat:
        raise ValueError(f"{what} requires a flat envelope (got {p.envelope.value})")


def drift_momentum(p: PulseParams, t0, t):
    """Longitudinal momentum at ``t`` of an electron born at rest at ``t0``.

    Parameters
    ----------
    p
        Flat-envelope pulse.
    t0, t
        Release and observation times, ``0 <= t0 <= t``.  Times after the
        pulse are clamped to ``tau`` (the momentum is frozen once ``F = 0``).

    Returns
    -------
    float or ndarray
        ``(f0/omega) (cos(omega t) - cos(omega t0))``.
    """
    _require_flat(p, "drift_momentum")
    t0_arr = np.asarray(t0, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t0_arr < 0.0) or np.any(t0_arr > p.tau):
        raise ValueError("release time outside the pulse")
    if np.any(t_arr < t0_arr):
        raise ValueError("observation time precedes release time")
    t_arr = np.minimum(t_arr, p.tau)
    w = p.omega
    out = p.quiver_momentum * (np.cos(w * t_arr) - np.cos(w * t0_arr))
    return float(out) if out.ndim == 0 else out


def final_momentum(p: PulseParams, t0):
    """Final drift momentum ``A(tau) - A(t0)`` for any envelope."""
    return vector_potential(p, p.tau) - vector_potential(p, t0)


def interference_partner(t1, omega: float):
    """Release time ``2 pi / omega - t1`` that leads to the same final momentum."""
    t1_arr = np.asarray(t1, dtype=float)
    period = 2.0 * math.pi / omega
    if np.any(t1_arr < 0.0) or np.any(t1_arr > period):
        raise ValueError("t1 must lie within one optical cycle")
    out = period - t1_arr
    return float(out) if out.ndim == 0 else out


def classical_support(p: PulseParams, n_half_cycles: int | None = None) -> ClassicalSupport:
    """Bounds of the final momentum after one or two half cycles of a flat pulse.

    ``n_half_cycles`` defaults to the pulse's own length.  One half cycle
    gives ``[-2 f0/omega, 0]``, two give ``[0, 2 f0/omega]``.
    """
    _require_flat(p, "classical_support")
    if n_half_cycles is None:
        n_half_cycles = int(round(2.0 * p.cycles))
    if n_half_cycles not in (1, 2):
        raise ValueError("n_half_cycles must be 1 or 2")
    span = 2.0 * p.quiver_momentum
    e_max = 0.5 * span**2
    if n_half_cycles == 1:
        return ClassicalSupport(-span, 0.0, e_max)
    return ClassicalSupport(0.0, span, e_max)


def momentum_trajectory(p: PulseParams, t0: float, times) -> np.ndarray:
    """Kinetic momentum along ``times`` for a release at ``t0``; zero before it."""
    times = np.asarray(times, dtype=float)
    a0 = vector_potential(p, t0)
    return np.where(times >= t0, vector_potential(p, times) - a0, 0.0)
