"""
Certifying flow Jacobians
=========================

Integrate each catalog Hamiltonian on extended phase space, take a
finite-difference Jacobian of the time-s map, and check that it preserves
``dp ^ dq - de ^ dt`` and ``dt^2`` and splits into HSp(2n) blocks.
"""

import numpy as np

import hsp

np.set_printoptions(precision=5, suppress=True)

for name in hsp.CATALOG_NAMES:
    H = hsp.catalog(name)
    y0 = [0.3, 0.8] if H.n == 1 else [1.0, 0.5, -0.2, 0.3]
    z0 = np.array(y0 + [0.0, 0.25])
    for s in (0.1, 1.0):
        rep = hsp.verify_flow_membership(H, z0, s)
        print(f"{name:>18} s={s:<4} symplectic {rep.symplectic_residual:.1e}  "
              f"dt^2 {rep.degenerate_residual:.1e}  passed={rep.passed}")

# %%
# The harmonic oscillator's Jacobian is the rotation by s.
rep = hsp.verify_flow_membership(hsp.catalog("harmonic"), np.array([0.0, 1.0, 0.0, 0.0]), 1.0)
print("sigma block:")
print(rep.decomposition.sigma)
print("rotation by 1 rad:")
print(np.array([[np.cos(1), -np.sin(1)], [np.sin(1), np.cos(1)]]))

# %%
# A non-structure-preserving method loses the property: RK4 with a coarse
# step over a long horizon drifts past the threshold.
rk4 = hsp.verify_flow_membership(hsp.catalog("harmonic"), np.array([0.0, 1.0, 0.0, 0.0]), 50.0,
                                 dt=0.1, method="rk4")
mid = hsp.verify_flow_membership(hsp.catalog("harmonic"), np.array([0.0, 1.0, 0.0, 0.0]), 50.0,
                                 dt=0.1, method="implicit_midpoint")
print(f"rk4:      symplectic residual {rk4.symplectic_residual:.2e} passed={rk4.passed}")
print(f"midpoint: symplectic residual {mid.symplectic_residual:.2e} passed={mid.passed}")

# %%
# Infinitesimal version: the linearized extended vector field lies in the
# hsp algebra.
gen = hsp.verify_generator(hsp.catalog("harmonic", {"m": 2.0, "k": 3.0}), np.array([0.4, -0.2, 0.0, 0.0]))
print("generator S block:")
print(gen.decomposition.s)
