"""
Defect density across the three quench regimes
==============================================

Sweep the quench time at g_i = 8 and compare the numerical kink density with
the closed form of whichever regime the quench falls in.
"""

import numpy as np

from kzq import MomentumGrid, QuenchProtocol, classify, spectrum
from kzq.regimes import density_kz, density_ps, density_s, turning_points

g_i = 8.0
grid = MomentumGrid(1024)

# the closed forms, one per regime
closed = {"S": lambda t: density_s(g_i, t), "PS": lambda t: density_ps(g_i, t, warn=False), "KZ": density_kz}

print(f"{'tau_Q':>10} {'regime':>6} {'n numeric':>11} {'closed form':>11}")
for tau in np.geomspace(1e-4, 50, 14):
    n = spectrum(QuenchProtocol(g_i, tau), grid).density
    label = classify(g_i, tau).value
    print(f"{tau:10.3g} {label:>6} {n:11.6f} {closed[label](tau):11.6f}")

# the regimes meet at the turning points
tp = turning_points(g_i)
print(f"\ntau_S = {tp.tau_S:.4g} (tau_S g_i^2 = {tp.tau_S * g_i**2:.3f}), tau_KZ = {tp.tau_KZ:.4f}")
