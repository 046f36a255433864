"""
Gyration in a uniform magnetic field
====================================

A charge in a uniform field ``B`` moves on a circle of radius
``m |v| c / (charge B)`` with period ``2 pi m c / (charge B)``.  The implicit
midpoint rule keeps the speed and the radius to round-off.
"""

import numpy as np

import hsp

H = hsp.catalog("charged_uniform_B", {"m": 1.5, "charge": 2.0, "c": 1.0, "B": 0.8})
y0 = np.array([0.9, -0.4, 0.2, 0.1])
oracle = hsp.gyration_oracle(H, y0)
print(f"speed {oracle['speed']:.6f}  radius {oracle['radius']:.6f}  period {oracle['period']:.6f}")

traj = hsp.integrate(H, y0, 0.0, oracle["period"], 1e-3)
check = hsp.gyration_check(H, traj)
print(f"radius range along the orbit: [{check['radius_measured_min']:.10f}, {check['radius_measured_max']:.10f}]")
print(f"relative radius error {check['radius_rel_error']:.1e}, speed error {check['speed_rel_error']:.1e}")
print("back at the start after one period:", np.allclose(traj.q[-1], y0[2:], atol=1e-5))

# %%
# Stormer-Verlet needs a separable Hamiltonian and refuses this one.
try:
    hsp.integrate(H, y0, 0.0, 1.0, 1e-2, "stormer_verlet")
except hsp.NonseparableError as exc:
    print("stormer_verlet:", exc)

# %%
# Data for plotting elsewhere: the orbit as CSV.
csv_text = hsp.trajectory_to_csv(hsp.integrate(H, y0, 0.0, 0.05, 1e-2))
print(csv_text)
