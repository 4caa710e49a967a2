
# coding: utf-8

# # The same experiment with the Schrodinger equation
#
# Propagate hydrogen through the one-cycle pulse on the reference radial grid
# and project onto Coulomb waves.  This takes about five minutes on one core
# (two runs of about 2500 Crank-Nicolson steps over 121 partial waves).
# Cutting l_max much below 120 is not an option: at l_max = 60 the top
# partial wave is as large as the biggest one and the fringes move.

import time

import numpy as np

from timeslit.observables import compare_peaks, find_peaks, spectrum_from_projection, summary_stats
from timeslit.pulse import PulseParams
from timeslit.sfa import sfa_spectrum
from timeslit.tdse import (RadialGrid, bound_projector, bound_states, ground_state, negative_energy_states,
                           propagate_pulse, remove_bound_states, total_ionization)
from timeslit.tdse.continuum import momentum_map_from_projection, project_momentum

l_max = 120
dt = 0.05

p = PulseParams.from_cycles(0.05, 0.075, 1.0)
grid = RadialGrid.default()
print(grid.describe())


# ## Ground state
#
# Imaginary-time relaxation lands on E = -1/2 to machine precision.

psi0, e0 = ground_state(grid, l_max=l_max)
print("E0 =", e0)


# ## Propagation

t = time.perf_counter()
final, diag = propagate_pulse(psi0, p, dt)
print(f"{diag.steps} steps in {time.perf_counter() - t:.0f} s, norm drift {abs(final.norm() - 1):.1e}")

every = negative_energy_states(grid, l_max)
print("ionization probability:", total_ionization(final, every))


# ## Spectrum and map
#
# The partial-wave amplitudes should fall off well before l_max; the last
# one relative to the largest is printed as a check.

proj = project_momentum(final, check=False)
print("|a_Lmax| / max |a_l| =", proj.l_convergence())

spec = spectrum_from_projection(proj)
stats = summary_stats(momentum_map_from_projection(proj))
print("<kz> =", stats.mean_kz, " fraction kz > 0 =", stats.fraction_kz_positive)


# ## Against the semiclassical fringes
#
# Peaks between 1 and 3.5 a.u. side by side.  The plain TDSE fringes have
# about the SFA spacing but sit roughly half a fringe away.  The offset goes
# away once the excited states are taken out, see below.

sfa_peaks = find_peaks(sfa_spectrum(p)).within(1.0, 3.5)
print("SFA :", np.round(sfa_peaks.positions, 3))
print("TDSE:", np.round(find_peaks(spec).within(1.0, 3.5).positions, 3))


# ## Removing the excited states
#
# Project out every bound state with n <= 20 except 1s after each step.
# Now the two routes line up, with the TDSE peaks a little lower in energy:
# the Coulomb tail slows the electron on the way out.

removal = bound_states(grid, 20, 19)
cleaned, _ = propagate_pulse(psi0, p, dt, projector=bound_projector(removal, keep_ground=True))
cleaned = remove_bound_states(cleaned, 20, keep_ground=True, spectrum=removal)
tdse_peaks = find_peaks(spectrum_from_projection(project_momentum(cleaned, check=False))).within(1.0, 3.5)
print("TDSE, excited states removed:", np.round(tdse_peaks.positions, 3))
print(compare_peaks(sfa_peaks, tdse_peaks).to_text())
