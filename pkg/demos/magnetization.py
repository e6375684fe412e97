"""
Transverse magnetization after the quench
=========================================

Once the field reaches zero the magnetization oscillates as
A + M cos(4t + phi) with period pi/2.  Compare the sudden limit with finite
quench times.
"""

import math

import numpy as np

from kzq import MomentumGrid, QuenchProtocol, evolve_mode
from kzq.observables import magnetization_params, magnetization_trace, quadratic_correlators
from kzq.scaling import extremum_period

grid = MomentumGrid(1024)
g_i = 32.0


def params(tau):
    return magnetization_params(quadratic_correlators(evolve_mode(QuenchProtocol(g_i, tau), grid.q_values), 2))


sudden = params(0.0)
print(f"sudden: A = {sudden.A:.6f} (1/2 - 3/16g^2 = {0.5 - 3 / (16 * g_i**2):.6f})")
for tau in (1e-5, 1e-4, 1e-2, 1e-1):
    o = params(tau)
    print(f"tau_Q = {tau:6g}: A_su - A = {sudden.A - o.A:.3e}, M^2_su - M^2 = {sudden.M**2 - o.M**2:.3e}")

# free evolution: the period is pi/2
p = QuenchProtocol(6.0, 0.8, hold=True)
t = np.linspace(0.0, 4 * math.pi, 4001)
trace = magnetization_trace(p, t, grid)
print(f"\nfree period = {extremum_period(t, trace, skip=0):.6f} (pi/2 = {math.pi / 2:.6f})")
