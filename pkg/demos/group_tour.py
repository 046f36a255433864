"""
A tour of HSp(2n)
=================

Build elements of the extended phase-space group, multiply them, and look at
how they act on differentials ``(dp, dq, de, dt)``.
"""

import numpy as np

import hsp

np.set_printoptions(precision=4, suppress=True)

# A Weyl-Heisenberg element with force f, velocity v and power r.
h = hsp.heisenberg(f=[2.0], v=[3.0], r=5.0)
print("realization of Y(f=2, v=3, r=5):")
print(hsp.to_matrix(h))

# Acting on a pure time step dt = 1 translates momentum by f, position by v
# and energy by r.
print("action on dt:", hsp.apply_differential(h, [0, 0, 0, 1]))

# Acting on (dp, dq) = (1, 1) changes the energy by v dp - f dq.
print("action on dp + dq:", hsp.apply_differential(h, [1, 1, 0, 0]))

# %%
# Random elements come from the exponential of a random algebra element.
# The same seed always gives the same element (PCG64 stream).
g = hsp.random_element(2, seed=42)
print("random element, n=2")
print(hsp.to_matrix(g))

forms = hsp.metric_forms(2)
sym, deg = hsp.extended_invariance_residuals(hsp.to_matrix(g), forms)
print(f"J^T zeta J - zeta: {sym:.1e}   J^T eta0 J - eta0: {deg:.1e}")

# %%
# The structured product agrees with the matrix product.
a, b = hsp.random_element(2, 1), hsp.random_element(2, 2)
gap = np.abs(hsp.to_matrix(hsp.compose(a, b)) - hsp.to_matrix(a) @ hsp.to_matrix(b)).max()
print(f"structured vs matrix product: {gap:.1e}")
print(f"g g^-1 = 1 up to {hsp.field_distance(hsp.compose(g, hsp.inverse(g)), hsp.identity(2)):.1e}")

# %%
# Subgroups: rotations (acting on p and q alike), boosts and the inertial
# combination of the two.
quarter = np.array([[0.0, -1.0], [1.0, 0.0]])
rot = hsp.rotation_element(quarter)
boost = hsp.galilei_boost([1.0, 0.5])
for label, el in [("rotation", rot), ("boost", boost), ("rotation*boost", rot @ boost),
                  ("reflection", hsp.rotation_element(np.diag([1.0, -1.0])))]:
    tags = [k for k, v in hsp.classify(el).items() if v]
    print(f"{label:>15}: {tags}")

# %%
# Conjugating a Heisenberg element by anything stays inside the Heisenberg
# subgroup, and the closed-form automorphism predicts the result.
hh = hsp.heisenberg_part(hsp.random_element(2, 7))
conj = hsp.conjugate_heisenberg(g, hh)
print("sigma part after conjugation is the identity:", np.allclose(conj.sigma, np.eye(4), atol=1e-12))
print(f"closed form mismatch: {hsp.field_distance(conj, hsp.conjugate_heisenberg_closed_form(g, hh)):.1e}")
