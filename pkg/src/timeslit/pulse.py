"""Linearly polarized laser pulses with flat or sin^2 envelopes.

The field is ``F(t) = f(t) sin(omega t)`` on ``[0, tau]`` and exactly zero
elsewhere.  The vector potential follows ``A(t) = -int_0^t F dt'`` and is held
at ``A(tau)`` once the pulse is over.  Atomic units throughout.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class Envelope(enum.Enum):
    FLAT = "flat"
    SIN_SQUARED = "sin2"

    @classmethod
    def parse(cls, value: "str | Envelope") -> "Envelope":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        aliases = {
            "flat": cls.FLAT,
            "square": cls.FLAT,
            "sin2": cls.SIN_SQUARED,
            "sinsquared": cls.SIN_SQUARED,
            "sin^2": cls.SIN_SQUARED,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown envelope {value!r}") from None


@dataclass(frozen=True)
class PulseParams:
    """Laser pulse definition.

    Parameters
    ----------
    omega
        Carrier angular frequency.
    f0
        Peak field amplitude.
    tau
        Total duration; the field vanishes outside ``[0, tau]``.
    envelope
        ``Envelope.FLAT`` (``f = f0``) or ``Envelope.SIN_SQUARED``
        (``f = f0 sin^2(pi t / tau)``).
    """

    omega: float
    f0: float
    tau: float
    envelope: Envelope = Envelope.FLAT

    def __post_init__(self):
        object.__setattr__(self, "envelope", Envelope.parse(self.envelope))
        for name in ("omega", "f0", "tau"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.f0 < 0:
            raise ValueError("f0 must be non-negative")
        if self.tau <= 0:
            raise ValueError("tau must be positive")

    @classmethod
    def from_cycles(cls, omega: float, f0: float, cycles: float, envelope="flat") -> "PulseParams":
        """Pulse lasting ``cycles`` optical periods (0.5 for a half cycle)."""
        return cls(omega, f0, cycles * 2.0 * math.pi / omega, Envelope.parse(envelope))

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    @property
    def cycles(self) -> float:
        return self.tau / self.period

    @property
    def quiver_momentum(self) -> float:
        """Classical momentum amplitude ``f0 / omega``."""
        return self.f0 / self.omega

    @property
    def is_flat(self) -> bool:
        return self.envelope is Envelope.FLAT

    def envelope_at(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= 0.0) & (t <= self.tau)
        if self.is_flat:
            f = np.full_like(t, self.f0)
        else:
            f = self.f0 * np.sin(np.pi * t / self.tau) ** 2
        return np.where(inside, f, 0.0)

    def as_dict(self) -> dict:
        return {
            "omega": self.omega,
            "f0": self.f0,
            "tau": self.tau,
            "cycles": self.cycles,
            "envelope": self.envelope.value,
        }


def _scalar_or_array(x, like):
    return float(x) if np.ndim(like) == 0 else x


def field_at(p: PulseParams, t):
    """Electric field ``F_z(t)``; exactly 0 outside ``[0, tau]``."""
    t_arr = np.asarray(t, dtype=float)
    inside = (t_arr >= 0.0) & (t_arr <= p.tau)
    value = p.envelope_at(t_arr) * np.sin(p.omega * t_arr)
    return _scalar_or_array(np.where(inside, value, 0.0), t)


def _one_minus_cos_over(a: float, t):
    # int_0^t sin(a s) ds, with the a -> 0 limit
    if abs(a) < 1e-300:
        return np.zeros_like(t)
    return (1.0 - np.cos(a * t)) / a


def _vector_potential_inside(p: PulseParams, t):
    w = p.omega
    if p.is_flat:
        return p.quiver_momentum * (np.cos(w * t) - 1.0)
    # sin^2(pi t/tau) sin(w t) = [sin wt - (sin(w+W)t + sin(w-W)t)/2] / 2, W = 2 pi / tau
    big_w = 2.0 * math.pi / p.tau
    integral = 0.5 * (
        _one_minus_cos_over(w, t)
        - 0.5 * _one_minus_cos_over(w + big_w, t)
        - 0.5 * _one_minus_cos_over(w - big_w, t)
    )
    return -p.f0 * integral


def vector_potential(p: PulseParams, t):
    """Vector potential ``A_z(t) = -int_0^t F_z dt'``.

    Zero before the pulse and clamped to ``A_z(tau)`` after it.  Both
    envelopes are evaluated in closed form.
    """
    t_arr = np.asarray(t, dtype=float)
    clipped = np.clip(t_arr, 0.0, p.tau)
    value = _vector_potential_inside(p, clipped)
    return _scalar_or_array(np.asarray(value, dtype=float), t)


def field_integral(p: PulseParams, t_from, t_to):
    """``int_{t_from}^{t_to} F dt`` (``= A(t_from) - A(t_to)``)."""
    return vector_potential(p, t_from) - vector_potential(p, t_to)
