"""Spectra, momentum maps and peak analysis shared by both engines."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal
from scipy.integrate import trapezoid


@dataclass
class SpectrumGrid:
    """A sampled one-dimensional distribution (``dP/dE`` or ``dP/dkz``)."""

    axis: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.axis = np.asarray(self.axis, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.axis.shape != self.values.shape or self.axis.ndim != 1:
            raise ValueError("axis and values must be 1-D arrays of equal length")
        if self.axis.size > 1 and np.any(np.diff(self.axis) <= 0):
            raise ValueError("axis must be strictly increasing")
        if np.any(self.values < 0):
            raise ValueError("distribution values must be non-negative")

    def total(self) -> float:
        return float(trapezoid(self.values, self.axis))

    def restrict(self, lo: float, hi: float) -> "SpectrumGrid":
        keep = (self.axis >= lo) & (self.axis <= hi)
        return SpectrumGrid(self.axis[keep], self.values[keep], dict(self.meta))


@dataclass
class MomentumMap:
    """``d2P/(dkz dkrho)`` on a rectangular grid, indexed ``[kz, krho]``."""

    kz_axis: np.ndarray
    krho_axis: np.ndarray
    density: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.kz_axis = np.asarray(self.kz_axis, dtype=float)
        self.krho_axis = np.asarray(self.krho_axis, dtype=float)
        self.density = np.asarray(self.density, dtype=float)
        if self.density.shape != (self.kz_axis.size, self.krho_axis.size):
            raise ValueError("density shape must be (len(kz_axis), len(krho_axis))")
        for ax in (self.kz_axis, self.krho_axis):
            if ax.size > 1 and np.any(np.diff(ax) <= 0):
                raise ValueError("axes must be strictly increasing")
        if np.any(self.krho_axis < 0):
            raise ValueError("krho must be non-negative")
        if np.any(self.density < 0):
            raise ValueError("density must be non-negative")

    def total(self) -> float:
        return float(trapezoid(trapezoid(self.density, self.krho_axis, axis=1), self.kz_axis))


@dataclass
class PeakList:
    positions: np.ndarray
    heights: np.ndarray
    prominences: np.ndarray | None = None

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.heights = np.asarray(self.heights, dtype=float)
        if self.positions.size > 1 and np.any(np.diff(self.positions) <= 0):
            raise ValueError("peak positions must be strictly increasing")

    def __len__(self):
        return int(self.positions.size)

    @property
    def spacings(self) -> np.ndarray:
        return np.diff(self.positions)

    def within(self, lo: float, hi: float) -> "PeakList":
        keep = (self.positions >= lo) & (self.positions <= hi)
        prom = None if self.prominences is None else self.prominences[keep]
        return PeakList(self.positions[keep], self.heights[keep], prom)


def spectrum_from_projection(proj) -> SpectrumGrid:
    """Photoelectron spectrum from a Coulomb-wave projection.

    The angular integral of the partial-wave sum is done exactly with the
    orthogonality of the Legendre polynomials, leaving
    ``dP/dk = k sum_l |<k,l|psi>|^2`` for energy-normalized waves; the
    Jacobian ``dk/dE = 1/k`` then gives ``dP/dE``.
    """
    k = np.asarray(proj.k, dtype=float)
    if k.size == 0:
        raise ValueError("empty projection")
    dp_dk = k * np.sum(np.abs(proj.amplitudes) ** 2, axis=1)
    return SpectrumGrid(0.5 * k**2, dp_dk / k, {"engine": "tdse", "quantity": "dP/dE", **proj.meta})


def longitudinal_distribution(m: MomentumMap) -> SpectrumGrid:
    """``dP/dkz = int dkrho d2P/(dkz dkrho)`` by the trapezoid rule."""
    values = trapezoid(m.density, m.krho_axis, axis=1)
    return SpectrumGrid(m.kz_axis, np.maximum(values, 0.0), {**m.meta, "quantity": "dP/dkz"})


def _refine_vertex(x, y, i):
    x0, x1, x2 = x[i - 1], x[i], x[i + 1]
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    # parabola through three (possibly unevenly spaced) points
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom
    if a >= 0:
        return x1, y1
    xv = -b / (2.0 * a)
    if not x0 <= xv <= x2:
        return x1, y1
    c = y1 - a * x1 * x1 - b * x1
    return xv, a * xv * xv + b * xv + c


def find_peaks(s: SpectrumGrid, min_prominence: float = 0.02) -> PeakList:
    """Local maxima whose prominence is at least ``min_prominence`` of the global maximum.

    Positions and heights are refined with a three-point parabola.
    """
    y = s.values
    if y.size < 3:
        raise ValueError("need at least 3 samples")
    top = float(np.max(y))
    if top <= 0:
        return PeakList([], [], np.array([]))
    idx, props = signal.find_peaks(y, prominence=min_prominence * top)
    pos, hts = [], []
    for i in idx:
        xv, yv = _refine_vertex(s.axis, y, i)
        pos.append(xv)
        hts.append(yv)
    return PeakList(np.array(pos), np.array(hts), np.asarray(props["prominences"], dtype=float))


@dataclass
class PeakComparison:
    """Result of matching two peak lists."""

    pairs: list
    window: float
    disjoint: bool
    shifts: np.ndarray
    mean_shift: float
    shift_std: float
    spacing_deviation: float
    max_spacing_deviation: float

    @property
    def n_matched(self) -> int:
        return len(self.pairs)

    @property
    def single_sign(self) -> bool:
        return bool(self.shifts.size) and (np.all(self.shifts > 0) or np.all(self.shifts < 0))

    def as_dict(self) -> dict:
        return {
            "status": "disjoint peak sets" if self.disjoint else "matched",
            "window": self.window,
            "n_matched": self.n_matched,
            "mean_shift": self.mean_shift,
            "shift_std": self.shift_std,
            "mean_abs_shift": float(np.mean(np.abs(self.shifts))) if self.shifts.size else math.nan,
            "single_sign": self.single_sign,
            "spacing_deviation": self.spacing_deviation,
            "max_spacing_deviation": self.max_spacing_deviation,
            "pairs": [(float(a), float(b)) for a, b in self.pairs],
        }

    def to_text(self) -> str:
        d = self.as_dict()
        lines = [f"{key} = {d[key]}" for key in d if key != "pairs"]
        for i, (a, b) in enumerate(d["pairs"]):
            lines.append(f"pair.{i} = {a:.6f} {b:.6f} {b - a:+.6f}")
        return "\n".join(lines) + "\n"


def compare_peaks(a: PeakList, b: PeakList, window: float = 0.15) -> PeakComparison:
    """Match peaks of ``b`` to peaks of ``a`` and summarize their offsets.

    Peaks of ``a`` are visited left to right; each takes the nearest still
    unmatched peak of ``b`` within ``window``.  Shifts are ``b - a``.  The
    spacing deviation is ``|db - da| / da`` over consecutive matched pairs
    (mean and max reported).  No match at all yields a result flagged
    ``disjoint`` rather than an exception.
    """
    used = np.zeros(len(b), dtype=bool)
    pairs = []
    for pa in a.positions:
        if len(b) == 0:
            break
        dist = np.abs(b.positions - pa)
        dist[used] = np.inf
        j = int(np.argmin(dist))
        if dist[j] <= window:
            used[j] = True
            pairs.append((float(pa), float(b.positions[j])))
    if not pairs:
        nan = math.nan
        return PeakComparison([], window, True, np.array([]), nan, nan, nan, nan)
    pa = np.array([p[0] for p in pairs])
    pb = np.array([p[1] for p in pairs])
    shifts = pb - pa
    if len(pairs) > 1:
        da, db = np.diff(pa), np.diff(pb)
        rel = np.abs(db - da) / da
        dev, dev_max = float(np.mean(rel)), float(np.max(rel))
    else:
        dev = dev_max = 0.0
    return PeakComparison(
        pairs,
        window,
        False,
        shifts,
        float(np.mean(shifts)),
        float(np.std(shifts)),
        dev,
        dev_max,
    )


def _integral_above(x, y, x0):
    """Trapezoid integral of ``y(x)`` over ``x >= x0`` with linear interpolation at ``x0``."""
    if x0 <= x[0]:
        return float(trapezoid(y, x))
    if x0 >= x[-1]:
        return 0.0
    y0 = np.interp(x0, x, y)
    keep = x > x0
    return float(trapezoid(np.concatenate(([y0], y[keep])), np.concatenate(([x0], x[keep]))))


@dataclass(frozen=True)
class SummaryStats:
    total: float
    mean_kz: float
    fraction_kz_positive: float

    def as_dict(self):
        return {
            "total": self.total,
            "mean_kz": self.mean_kz,
            "fraction_kz_positive": self.fraction_kz_positive,
        }


def summary_stats(m: MomentumMap) -> SummaryStats:
    """Total yield, longitudinal centroid and forward fraction of a momentum map."""
    marginal = trapezoid(m.density, m.krho_axis, axis=1)
    total = float(trapezoid(marginal, m.kz_axis))
    if total <= 0:
        return SummaryStats(0.0, math.nan, math.nan)
    mean_kz = float(trapezoid(marginal * m.kz_axis, m.kz_axis)) / total
    forward = min(1.0, max(0.0, _integral_above(m.kz_axis, marginal, 0.0) / total))
    return SummaryStats(total, mean_kz, forward)
