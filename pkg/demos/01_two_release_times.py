
# coding: utf-8

# # Two release times, one final momentum
#
# A one-cycle flat pulse, F(t) = f0 sin(wt), releases electrons at rest.  In
# the Simple Man's Model the final momentum is A(T) - A(t0), so every kz in
# [0, 2 f0/w] is reached from exactly two instants per cycle: t1 and its
# partner 2 pi/w - t1.  Those two paths are the two "slits" in time.

import numpy as np

from timeslit.classical import classical_support, final_momentum, interference_partner
from timeslit.pulse import PulseParams, field_at
from timeslit.sfa import interference_phase, release_times

p = PulseParams.from_cycles(omega=0.05, f0=0.075, cycles=1.0)
print("tau =", p.tau, " quiver momentum f0/w =", p.quiver_momentum)


# ## Where can the electrons end up?
#
# Half a cycle sends them backwards, a full cycle forwards.

for n in (1, 2):
    s = classical_support(p, n)
    print(f"{n} half cycle(s): kz in [{s.p_min:+.1f}, {s.p_max:+.1f}], E_max = {s.e_max}")


# ## The partner release
#
# Pick a release time in the first half cycle and check its partner lands on
# the same momentum.  The field has the same magnitude at both instants, so
# both paths tunnel with the same weight.

t1 = 0.3 * p.tau / 2
t2 = interference_partner(t1, p.omega)
print("t1, t2 =", t1, t2)
print("final kz:", final_momentum(p, t1), final_momentum(p, t2))
print("|F| at release:", abs(field_at(p, t1)), abs(field_at(p, t2)))


# ## The phase between the two paths
#
# The action difference dS is largest for slow electrons, whose two release
# times are far apart, and drops to zero at kz = 2 f0/w where t1 and t2 merge
# at the field maximum.  Fringes sit where dS/2 is a multiple of pi.

kz = np.linspace(0.05, 2.95, 30)
t1, t2 = release_times(p, kz)
ds = interference_phase(p, kz)
for a, b, c, d in zip(kz[::3], t1[::3], t2[::3], ds[::3]):
    print(f"kz = {a:5.2f}   t1 = {b:7.2f}   t2 = {c:7.2f}   dS = {d:8.3f}")

print("largest dS on this grid:", ds.max(), "->", int(ds.max() // (2 * np.pi)), "fringes above kz = 0.05")
