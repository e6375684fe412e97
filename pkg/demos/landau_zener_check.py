"""
Single modes against the exact Landau-Zener solution
====================================================

Each momentum mode is a Landau-Zener problem solved by parabolic cylinder
functions.  The adaptive integrator should reproduce it mode by mode.
"""

import numpy as np

from kzq import QuenchProtocol, evolve_mode, excitation_probability
from kzq.oracles import exact_probability

cases = [(32.0, 1e-4, 1.0), (8.0, 0.25, 0.7), (8.0, 10.0, 0.1), (4.0, 50.0, 0.05)]

print(f"{'g_i':>5} {'tau_Q':>8} {'q':>5} {'p (ODE)':>12} {'p (exact)':>12} {'diff':>9}")
for g_i, tau, q in cases:
    p = QuenchProtocol(g_i, tau)
    ode = float(excitation_probability(evolve_mode(p, q)))
    exact = exact_probability(p, q)
    print(f"{g_i:5g} {tau:8g} {q:5g} {ode:12.9f} {exact:12.9f} {abs(ode - exact):9.1e}")

# slow quenches excite long waves only: p_q ~ exp(-2 pi tau q^2)
q = np.array([0.02, 0.05, 0.1])
m = evolve_mode(QuenchProtocol(10.0, 100.0), q)
print("\nKZ Gaussian:", np.round(excitation_probability(m), 4), np.round(np.exp(-2 * np.pi * 100 * q**2), 4))
