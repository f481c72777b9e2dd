"""
Refinement on a shock tube
==========================

Without a nozzle the scheme reduces to a Godunov-type method with discretised
rarefaction fans; its error against the exact fan shrinks with the mesh.
"""

# %%
from nozzleflow import GasConstants, presets
from nozzleflow.diagnostics import convergence_study
from nozzleflow.initial import riemann

gas = GasConstants(5.0 / 3.0)
rows = convergence_study(riemann(1.0, 0.0, 0.3, 0.0), presets("constant"), gas, (-1.0, 1.0), 0.2, 1 / 50, levels=3)
for r in rows:
    print(f"dx={r.dx:.4f}  L1(rho)={r.l1_rho:.4e}  L1(m)={r.l1_m:.4e}  steps={r.steps}")

# %%
# Successive error ratios; a first-order method on a discontinuous solution
# typically lands between 1.4 and 2.
print("ratios:", [round(a.l1_rho / b.l1_rho, 3) for a, b in zip(rows, rows[1:])])
