"""
Exact Riemann fans for isentropic gas
=====================================

Solve a few Riemann problems, sample them and check the middle state
against the brute-force oracle.
"""

# %%
# A Riemann problem is two constant states. ``solve`` returns the whole
# self-similar fan: two waves, the middle state and a region label.
import numpy as np

from nozzleflow import GasConstants, GasState, solve
from nozzleflow.riemann import oracle_middle_state

gas = GasConstants(5.0 / 3.0)


def state(rho, v):
    return GasState(rho, rho * v)


for left, right in [((1.0, 0.0), (0.3, 0.0)), ((1.0, 1.0), (1.0, -1.0)), ((1.0, -3.5), (1.0, 3.5))]:
    fan = solve(state(*left), state(*right), gas)
    print(f"{left} | {right}: region {fan.region}, waves {fan.wave1.kind}/{fan.wave2.kind}, "
          f"middle rho={fan.middle.rho:.6f} v={fan.middle.v:.6f}")

# %%
# The last pair pulls apart fast enough to open a vacuum between two
# rarefactions. Sampling along rays shows the density profile.
fan = solve(state(1.0, -3.5), state(1.0, 3.5), gas)
for xi in np.linspace(-5, 5, 11):
    print(f"xi={xi:+.1f}  rho={fan.sample(float(xi)).rho:.5f}")

# %%
# The oracle scans the wave curves on a fine density grid and refines the
# crossing independently of the solver's Newton iteration.
rng = np.random.default_rng(1)
worst = 0.0
for _ in range(200):
    uL = state(rng.uniform(0.01, 5), rng.uniform(-2, 2))
    uR = state(rng.uniform(0.01, 5), rng.uniform(-2, 2))
    a, b = solve(uL, uR, gas).middle, oracle_middle_state(uL, uR, gas)
    worst = max(worst, abs(a.rho - b.rho), abs(a.v - b.v))
print(f"largest solver/oracle difference over 200 pairs: {worst:.2e}")
