"""
Forces and boosts do not commute
================================

A pure force transformation followed by a pure velocity boost differs from
the opposite order only in the central (power) slot.  The difference is
bilinear in ``f`` and ``v`` and has magnitude ``2 |f . v|``.
"""

import numpy as np

import hsp

f = np.array([1.0, 0.0])
v = np.array([1.0, 0.0])

force = hsp.heisenberg(f=f, v=np.zeros(2))
boost = hsp.heisenberg(f=np.zeros(2), v=v)

fb = hsp.compose(force, boost)
bf = hsp.compose(boost, force)
print("force then boost: w =", fb.w, " r =", fb.r)
print("boost then force: w =", bf.w, " r =", bf.r)
print("central discrepancy:", hsp.central_discrepancy(f, v))

# %%
# Orthogonal force and velocity commute.
print("f perpendicular to v:", hsp.central_discrepancy([1.0, 0.0], [0.0, 1.0]))

# %%
# Sweep scalings of f and v: the discrepancy scales like a * b.
print(f"{'a':>5} {'b':>5} {'disc':>8}")
for a in (-1.0, 0.5, 2.0):
    for b in (1.0, 3.0):
        print(f"{a:>5} {b:>5} {hsp.central_discrepancy(a * f, b * v):>8}")

# %%
# The same sign shows up in the Lie algebra: the matrix commutator of the
# translation generators lands on the central generator U.
w1, w2, u = hsp.algebra_basis(1)
br = hsp.bracket(w1, w2)
print("[W1, W2] = r U with r =", br.r)
print("[W1, U]  = r U with r =", hsp.bracket(w1, u).r)
