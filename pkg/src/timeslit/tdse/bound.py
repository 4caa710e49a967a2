"""Bound states of the radial hydrogen Hamiltonian on a :class:`RadialGrid`."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import eigsh

from .grid import RadialGrid
from .linsolve import CondensedSolver
from .state import PartialWaveState


class ConvergenceError(RuntimeError):
    """An iterative solve stopped before reaching its tolerance."""

    def __init__(self, message, residual=math.nan, iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


def _energy(grid: RadialGrid, l: int, c: np.ndarray) -> float:
    h = grid.hamiltonian(l)
    return float(np.vdot(c, h @ c).real / np.vdot(c, c).real)


def ground_state(grid: RadialGrid, l_max: int = 0, step: float = 1.5, tol: float = 1e-13,
                 max_iter: int = 500):
    """Relax the ``l = 0`` block in imaginary time.

    Each iteration applies the Crank-Nicolson form of ``exp(-step H)``, which
    amplifies the lowest level by ``(1 + step/2)/(1 - step/2)`` relative to the
    highest levels, and renormalizes.

    Returns
    -------
    (PartialWaveState, float)
        Normalized 1s state padded to ``l_max`` and its energy.

    Raises
    ------
    ConvergenceError
        If the energy change per iteration does not drop below ``tol``.
    """
    solver = CondensedSolver(grid, [0], 0.5 * step)
    r = grid.padded_points
    x = (np.sqrt(grid.padded_weights) * r * np.exp(-0.5 * r))[None, :].astype(complex)
    x[:, [0, -1]] = 0.0
    x /= np.linalg.norm(x)
    h = grid.hamiltonian(0)
    energy = math.inf
    residual = math.inf
    for it in range(1, max_iter + 1):
        y = solver.solve_padded(x)
        x = 2.0 * y - x
        x /= np.linalg.norm(x)
        c = x[0, 1:-1]
        hc = h @ c
        e_new = float(np.vdot(c, hc).real)
        residual = float(np.linalg.norm(hc - e_new * c))
        if abs(e_new - energy) < tol and residual < 1e-8:
            energy = e_new
            break
        energy = e_new
    else:
        raise ConvergenceError(
            f"imaginary-time relaxation did not converge (residual {residual:.2e})", residual, max_iter
        )
    c = x[0, 1:-1].real
    c = c * np.sign(c[np.argmax(np.abs(c))])
    state = PartialWaveState.zeros(grid, l_max)
    state.coeffs[0] = c
    state.meta.update(energy=energy, iterations=it, residual=residual)
    return state, energy


@dataclass
class BoundSpectrum:
    """Negative-energy eigenstates per partial wave.

    ``states[l]`` has shape ``(n_l, grid.size)`` (rows are real, normalized
    coefficient vectors ordered by energy); ``energies[l]`` the matching levels.
    """

    grid: RadialGrid
    energies: list
    states: list

    def principal(self, l: int) -> np.ndarray:
        """Principal-like quantum numbers ``n = n_r + l + 1`` of the ``l`` block."""
        return np.arange(len(self.energies[l])) + l + 1

    def count(self) -> int:
        return int(sum(len(e) for e in self.energies))


def _lowest(grid: RadialGrid, l: int, k: int, sigma: float):
    k = min(k, grid.size - 2)
    try:
        vals, vecs = eigsh(grid.hamiltonian(l).tocsc(), k=k, sigma=sigma, which="LM")
    except Exception as exc:  # ARPACK raises several unrelated types
        raise RuntimeError(f"bound-state eigen-solve failed for l={l}: {exc}") from exc
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    keep = vals < 0
    vals, vecs = vals[keep], vecs[:, keep]
    for j in range(vecs.shape[1]):
        v = vecs[:, j]
        vecs[:, j] = v * np.sign(v[np.argmax(np.abs(v))])
    return vals, vecs, k


def bound_states(grid: RadialGrid, n_max: int, l_max: int | None = None, sigma: float = -0.6) -> BoundSpectrum:
    """Eigenstates with ``E < 0`` and principal index ``n <= n_max`` for ``l <= l_max``.

    Uses shift-invert Lanczos on each sparse ``H_l``.  On a finite box the
    highest Rydberg levels turn into positive-energy box states; those are
    excluded.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    top = n_max - 1 if l_max is None else min(l_max, n_max - 1)
    energies, states = [], []
    for l in range(top + 1):
        want = n_max - l
        vals, vecs, _ = _lowest(grid, l, want + 2, sigma)
        energies.append(vals[:want])
        states.append(np.ascontiguousarray(vecs[:, :want].T))
    return BoundSpectrum(grid, energies, states)


def negative_energy_states(grid: RadialGrid, l_max: int, sigma: float = -0.6) -> BoundSpectrum:
    """Every ``E < 0`` eigenstate the box supports, for ``l <= l_max``.

    The number of levels per block is found by doubling the Lanczos request
    until a non-negative level shows up.  Blocks above the first empty one are
    left empty (the centrifugal barrier only pushes levels up).
    """
    energies, states = [], []
    for l in range(l_max + 1):
        k = 16
        while True:
            vals, vecs, used = _lowest(grid, l, k, sigma)
            if vals.size < used or used >= grid.size - 2:
                break
            k *= 2
        energies.append(vals)
        states.append(np.ascontiguousarray(vecs.T))
        if vals.size == 0:
            break
    return BoundSpectrum(grid, energies, states)


def bound_projector(spectrum: BoundSpectrum, keep_ground: bool = True):
    """Callable ``state -> state`` removing the listed bound components.

    With ``keep_ground`` the 1s level is left untouched, so only excited
    states are removed.
    """
    blocks = []
    for l, vecs in enumerate(spectrum.states):
        if keep_ground and l == 0:
            vecs = vecs[1:]
        if len(vecs):
            blocks.append((l, vecs))

    def apply(state: PartialWaveState) -> PartialWaveState:
        out = state.copy()
        for l, vecs in blocks:
            if l > out.l_max:
                continue
            amp = vecs @ out.coeffs[l]
            out.coeffs[l] -= amp @ vecs
        return out

    return apply


def remove_bound_states(state: PartialWaveState, n_max: int, keep_ground: bool = False,
                        spectrum: BoundSpectrum | None = None) -> PartialWaveState:
    """Subtract projections onto bound eigenstates with ``n <= n_max``."""
    if spectrum is None:
        spectrum = bound_states(state.grid, n_max, state.l_max)
    return bound_projector(spectrum, keep_ground)(state)


def bound_population(state: PartialWaveState, spectrum: BoundSpectrum) -> float:
    """Total probability in the states of ``spectrum``."""
    total = 0.0
    for l, vecs in enumerate(spectrum.states):
        if l <= state.l_max and len(vecs):
            total += float(np.sum(np.abs(vecs @ state.coeffs[l]) ** 2))
    return total


def total_ionization(state: PartialWaveState, spectrum: BoundSpectrum) -> float:
    """``norm - bound population`` for a state after the pulse.

    Pass :func:`negative_energy_states` here: a spectrum cut at some ``n_max``
    counts the remaining Rydberg population as ionized.
    """
    return state.norm() - bound_population(state, spectrum)
