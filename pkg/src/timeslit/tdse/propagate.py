"""Real-time propagation in the length gauge.

One step of size ``dt`` is the symmetric splitting

    exp(-i z F dt/2) . CN(H0, dt) . exp(-i z F dt/2)

where ``CN`` is the Crank-Nicolson form of the field-free propagator and the
dipole term ``z F = r cos(theta) F`` is exponentiated exactly after rotating
the partial-wave index into the eigenbasis of ``cos(theta)``.  Adjacent
half kicks are merged, so a step costs one condensed solve and one rotation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..pulse import PulseParams, field_at
from .grid import RadialGrid
from .linsolve import CondensedSolver
from .state import PartialWaveState

logger = logging.getLogger(__name__)

NORM_STEP_TOL = 1e-9
NORM_RUN_TOL = 1e-6
BOX_EDGE_TOL = 1e-10


class PropagationError(RuntimeError):
    """Raised when a run violates its conservation checks."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


def dipole_coupling(l_max: int) -> np.ndarray:
    """``<l'0|cos(theta)|l0>`` for ``l, l' <= l_max`` (tridiagonal)."""
    l = np.arange(l_max)
    c = (l + 1) / np.sqrt((2 * l + 1) * (2 * l + 3))
    return np.diag(c, 1) + np.diag(c, -1)


@dataclass
class PropagationDiagnostics:
    steps: int = 0
    dt: float = 0.0
    norm_start: float = math.nan
    norm_end: float = math.nan
    max_step_norm_change: float = 0.0
    removed_population: float = 0.0
    edge_density: float = 0.0
    warnings: list = field(default_factory=list)

    @property
    def norm_drift(self) -> float:
        return abs(self.norm_end + self.removed_population - self.norm_start)

    def as_dict(self) -> dict:
        return {
            "steps": self.steps,
            "dt": self.dt,
            "norm_start": self.norm_start,
            "norm_end": self.norm_end,
            "norm_drift": self.norm_drift,
            "max_step_norm_change": self.max_step_norm_change,
            "removed_population": self.removed_population,
            "edge_density": self.edge_density,
            "warnings": list(self.warnings),
        }


class Propagator:
    """Time stepper for a fixed grid, ``l_max`` and step size.

    Parameters
    ----------
    grid
        Radial grid.
    pulse
        Laser pulse, or ``None`` for field-free evolution.
    l_max
        Highest partial wave kept.
    dt
        Nominal step; each call to :meth:`run` adjusts it slightly so that
        the interval is covered by an integer number of steps.
    projector
        Optional callable applied to the state after every step (used to
        keep excited bound states unpopulated).
    """

    def __init__(self, grid: RadialGrid, pulse: PulseParams | None, l_max: int, dt: float = 0.05,
                 projector=None):
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.grid = grid
        self.pulse = pulse
        self.l_max = int(l_max)
        self.dt = float(dt)
        self.projector = projector
        lam, vec = np.linalg.eigh(dipole_coupling(self.l_max))
        self._lam = lam
        self._rot = np.ascontiguousarray(vec)
        self._rot_t = np.ascontiguousarray(vec.T)
        self._lam_r = np.outer(lam, grid.padded_points)
        self._solvers: dict[float, CondensedSolver] = {}

    def _solver(self, dt: float) -> CondensedSolver:
        key = round(dt, 14)
        if key not in self._solvers:
            self._solvers.clear()
            self._solvers[key] = CondensedSolver(self.grid, np.arange(self.l_max + 1), 0.5j * dt)
        return self._solvers[key]

    def field(self, t: float) -> float:
        return 0.0 if self.pulse is None else float(field_at(self.pulse, t))

    def _kick(self, x: np.ndarray, strength: float) -> np.ndarray:
        """Apply ``exp(-i strength r cos(theta))`` to the padded array ``x``."""
        if strength == 0.0:
            return x
        nl, npad = x.shape
        y = (self._rot_t @ x.view(float).reshape(nl, 2 * npad)).view(complex).reshape(nl, npad)
        y *= np.exp(-1j * strength * self._lam_r)
        return (self._rot @ y.view(float).reshape(nl, 2 * npad)).view(complex).reshape(nl, npad)

    def run(self, state: PartialWaveState, t_final: float, check: bool = True):
        """Propagate ``state`` to ``t_final``; returns ``(new_state, diagnostics)``."""
        if state.l_max != self.l_max:
            raise ValueError(f"state has l_max={state.l_max}, propagator {self.l_max}")
        t0 = state.time
        span = t_final - t0
        diag = PropagationDiagnostics()
        diag.norm_start = state.norm()
        if span < 0:
            raise ValueError("cannot propagate backwards")
        n_steps = max(1, int(math.ceil(span / self.dt - 1e-9))) if span > 0 else 0
        diag.steps = n_steps
        if n_steps == 0:
            diag.norm_end = diag.norm_start
            return state.copy(), diag
        dt = span / n_steps
        diag.dt = dt
        solver = self._solver(dt)
        x = np.zeros((self.l_max + 1, self.grid.n_padded), dtype=complex)
        x[:, 1:-1] = state.coeffs
        work = np.empty_like(x)
        norm = diag.norm_start
        x = self._kick(x, 0.5 * dt * self.field(t0))
        for j in range(n_steps):
            solver.solve_padded(x, out=work)
            work *= 2.0
            work -= x
            x, work = work, x
            t = t0 + (j + 1) * dt
            h = 0.5 * dt if j == n_steps - 1 else dt
            x = self._kick(x, h * self.field(t))
            new_norm = float(np.vdot(x, x).real)
            if self.projector is not None:
                inner = PartialWaveState(self.grid, x[:, 1:-1], t)
                projected = self.projector(inner)
                x[:, 1:-1] = projected.coeffs
                after = float(np.vdot(x, x).real)
                diag.removed_population += new_norm - after
                change = abs(new_norm - norm)
                new_norm = after
            else:
                change = abs(new_norm - norm)
            diag.max_step_norm_change = max(diag.max_step_norm_change, change)
            norm = new_norm
            if check and change > NORM_STEP_TOL:
                diag.norm_end = norm
                raise PropagationError(f"norm changed by {change:.3e} in step {j}", diag)
        out = PartialWaveState(self.grid, x[:, 1:-1].copy(), t_final, dict(state.meta))
        diag.norm_end = out.norm()
        diag.edge_density = edge_density(out)
        if diag.edge_density > BOX_EDGE_TOL:
            msg = f"box too small: density {diag.edge_density:.2e} near r_max"
            diag.warnings.append(msg)
            logger.warning(msg)
        if check and diag.norm_drift > NORM_RUN_TOL:
            raise PropagationError(f"norm drift {diag.norm_drift:.3e} over the run", diag)
        return out, diag


def edge_density(state: PartialWaveState, fraction: float = 0.02) -> float:
    """Largest radial probability density ``sum_l |u_l(r)|^2`` in the outer ``fraction`` of the box."""
    r = state.grid.points
    outer = r >= (1.0 - fraction) * state.grid.r_max
    dens = np.sum(np.abs(state.coeffs[:, outer]) ** 2, axis=0) / state.grid.weights[outer]
    return float(np.max(dens)) if dens.size else 0.0


def propagate(state: PartialWaveState, p: PulseParams | None, dt: float, t_final: float | None = None,
              projector=None):
    """Advance ``state`` by one step ``dt``, or up to ``t_final`` when given.

    Returns ``(state, diagnostics)``.  A fresh :class:`Propagator` is built on
    every call; reuse one directly for repeated stepping.
    """
    prop = Propagator(state.grid, p, state.l_max, dt, projector=projector)
    end = state.time + dt if t_final is None else t_final
    return prop.run(state, end)


def propagate_pulse(state: PartialWaveState, p: PulseParams, dt: float = 0.05, post_time: float = 0.0,
                    projector=None):
    """Run through the whole pulse and optionally ``post_time`` of free evolution."""
    prop = Propagator(state.grid, p, state.l_max, dt, projector=projector)
    out, diag = prop.run(state, p.tau)
    if post_time > 0:
        free = Propagator(state.grid, None, state.l_max, dt, projector=projector)
        out, diag2 = free.run(out, p.tau + post_time)
        diag.steps += diag2.steps
        diag.norm_end = diag2.norm_end
        diag.removed_population += diag2.removed_population
        diag.max_step_norm_change = max(diag.max_step_norm_change, diag2.max_step_norm_change)
        diag.edge_density = diag2.edge_density
        diag.warnings.extend(diag2.warnings)
    return out, diag
