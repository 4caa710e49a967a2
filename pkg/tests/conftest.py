"""Shared fixtures.

The reference TDSE runs (default grid, l_max = 120) take several minutes in
total and are built once per session, only when a test asks for them.  Set
``TIMESLIT_TEST_CACHE=/some/dir`` to keep the final states between sessions.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import pytest

from timeslit.pulse import PulseParams
from timeslit.tdse import (Propagator, RadialGrid, bound_projector, bound_states, ground_state, load_checkpoint,
                           negative_energy_states, propagate_pulse, remove_bound_states, total_ionization)
from timeslit.tdse.continuum import project_states

W, F0 = 0.05, 0.075
L_MAX = 120
DT = 0.05
N_BOUND = 20
FREE_TIME = 100.0

HALF = PulseParams.from_cycles(W, F0, 0.5)
FULL = PulseParams.from_cycles(W, F0, 1.0)
SIN2 = PulseParams.from_cycles(W, F0, 2.0, "sin2")


class ReferenceRuns:
    """Lazily propagated reference cases on the default grid."""

    def __init__(self, cache: Path | None):
        self.cache = cache
        self.grid = RadialGrid.default()
        self._ground = None
        self._bound = None
        self._every = None
        self._runs: dict = {}
        self._proj: dict = {}

    @property
    def ground(self):
        if self._ground is None:
            self._ground = ground_state(self.grid, l_max=L_MAX)
        return self._ground

    @property
    def bound(self):
        if self._bound is None:
            self._bound = bound_states(self.grid, N_BOUND, N_BOUND - 1)
        return self._bound

    @property
    def every_bound(self):
        if self._every is None:
            self._every = negative_energy_states(self.grid, L_MAX)
        return self._every

    def _cached(self, name, compute):
        if name in self._runs:
            return self._runs[name]
        if self.cache is not None:
            st, meta = self.cache / f"{name}.bin", self.cache / f"{name}.json"
            if st.is_file() and meta.is_file():
                self._runs[name] = (load_checkpoint(st, self.grid), json.loads(meta.read_text()))
                return self._runs[name]
        state, diag = compute()
        info = diag.as_dict()
        if self.cache is not None:
            self.cache.mkdir(parents=True, exist_ok=True)
            state.save(self.cache / f"{name}.bin")
            (self.cache / f"{name}.json").write_text(json.dumps(info))
        self._runs[name] = (state, info)
        return self._runs[name]

    def run(self, name):
        """``(final_state, diagnostics_dict)`` for one of the named cases."""
        s0 = self.ground[0]
        if name == "half":
            return self._cached(name, lambda: propagate_pulse(s0, HALF, DT))
        if name == "full":
            return self._cached(name, lambda: propagate_pulse(s0, FULL, DT))
        if name == "sin2":
            return self._cached(name, lambda: propagate_pulse(s0, SIN2, DT))
        if name == "free":
            full = self.run("full")[0]
            return self._cached(name, lambda: Propagator(self.grid, None, L_MAX, DT).run(full, FULL.tau + FREE_TIME))
        if name == "fig5":
            def compute():
                proj = bound_projector(self.bound, keep_ground=True)
                out, diag = propagate_pulse(s0, FULL, DT, projector=proj)
                return remove_bound_states(out, N_BOUND, keep_ground=True, spectrum=self.bound), diag
            return self._cached(name, compute)
        if name == "ladder":
            # dt halved and l_max raised by 20 in the same run
            def compute():
                g0 = s0.with_l_max(L_MAX + 20)
                return propagate_pulse(g0, FULL, DT / 2)
            return self._cached(name, compute)
        raise KeyError(name)

    def ionization(self, name) -> float:
        return total_ionization(self.run(name)[0], self.every_bound)

    def projection(self, name):
        """Coulomb-wave projection; all pending cases are projected together."""
        if name not in self._proj:
            names = [n for n in ("half", "full", "free", "sin2", "fig5") if n not in self._proj]
            if name not in names:
                names.append(name)
            projs = project_states([self.run(n)[0] for n in names], check=False)
            self._proj.update(zip(names, projs))
        return self._proj[name]


@pytest.fixture(scope="session")
def reference_runs():
    cache = os.environ.get("TIMESLIT_TEST_CACHE")
    return ReferenceRuns(Path(cache) if cache else None)


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def acceptance_report():
    """Record ``(criterion, passed, detail)``; printed in the terminal summary."""

    def record(number: int, passed: bool, detail: str):
        ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        print(ACCEPTANCE_LINES[number])
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
