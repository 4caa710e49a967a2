
# coding: utf-8

# # Semiclassical fringes
#
# The two-path amplitude gives a density B(k) cos^2(dS/2): a smooth tunnelling
# envelope times fringes.  Here we build the energy spectrum and the
# cylindrical momentum map and look at where the fringes fall.

import numpy as np

from timeslit.observables import find_peaks, longitudinal_distribution, summary_stats
from timeslit.pulse import PulseParams
from timeslit.sfa import interference_phase, ionization_envelope, sfa_momentum_map, sfa_spectrum

p = PulseParams.from_cycles(0.05, 0.075, 1.0)


# ## Envelope and fringe positions along the axis
#
# On the polarization axis the maxima sit at dS = 2 n pi.  dS falls with kz,
# so the fringes are dense for slow electrons and open up towards kz = 3.

kz = np.linspace(0.01, 2.99, 2000)
ds = interference_phase(p, kz)
b = ionization_envelope(p, kz)
print("envelope B at kz = 1.5:", np.interp(1.5, kz, b))

n = np.arange(1, int(ds.max() // (2 * np.pi)) + 1)
maxima = np.interp(2 * np.pi * n, ds[::-1], kz[::-1])
print("first fringe maxima below kz = 3:", np.round(maxima[:8], 3))
print("spacing between them:", np.round(-np.diff(maxima[:8]), 3))


# ## Energy spectrum
#
# Spacing between neighbouring peaks grows with energy, and nothing appears
# above E = 2 (f0/w)^2 = 4.5.

s = sfa_spectrum(p)
peaks = find_peaks(s)
print(len(peaks), "peaks")
print("positions:", np.round(peaks.positions[:8], 3), "...")
print("spacings: ", np.round(peaks.spacings[:8], 3), "...")
print("dP/dE above 4.5:", s.values[s.axis > 4.5].max())


# ## Momentum map
#
# Everything is emitted forward, centred on kz = f0/w.

m = sfa_momentum_map(p)
stats = summary_stats(m)
print("total =", stats.total, " <kz> =", stats.mean_kz, " fraction kz > 0 =", stats.fraction_kz_positive)

dkz = longitudinal_distribution(m)
print("dP/dkz maxima:", np.round(find_peaks(dkz).positions, 3))
