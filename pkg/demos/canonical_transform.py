"""
Hamiltonians under canonical maps
=================================

Under ``y~ = rho(y)`` the Hamiltonian is carried along as ``H o rho^-1``.
Integrating the transformed system from ``rho(y0)`` reproduces ``rho`` of
the original trajectory.
"""

import numpy as np

import hsp

H = hsp.catalog("free")
scaling = hsp.builtin_canonical_maps("scaling", {"lam": 2.0})
Ht = hsp.transform_hamiltonian(H, scaling)

print(f"{'p~':>5} {'H~(p~)':>8} {'p~^2/8':>8}")
for pt in (-1.0, 1.0, 2.0, 3.0):
    print(f"{pt:>5} {float(Ht.value([pt, 0.0])):>8.4f} {pt ** 2 / 8:>8.4f}")

# %%
# Check that the built-in maps are canonical, and that a plain stretch is not.
pts = np.random.default_rng(0).normal(size=(5, 2))
for name in ("identity", "scaling", "phase_rotation", "shear"):
    rep = hsp.verify_canonical_map(hsp.builtin_canonical_maps(name), pts)
    print(f"{name:>15}: residual {rep.symplectic_residual:.1e} passed={rep.passed}")
stretch = hsp.linear_map(np.diag([2.0, 1.0]), name="stretch")
rep = hsp.verify_canonical_map(stretch, pts)
print(f"{'stretch':>15}: residual {rep.symplectic_residual:.1e} passed={rep.passed}")

# %%
# Trajectory correspondence for the shear on the harmonic oscillator.
res = hsp.trajectory_correspondence(hsp.catalog("harmonic"), hsp.builtin_canonical_maps("shear"),
                                    [0.5, 1.0], 0.0, 5.0, 1e-3)
print(f"max |rho(phi(t)) - phi~(t)| on [0, 5]: {res['max_deviation']:.1e}")
