"""Tour of the tunable loss family.

Prints loss values and derivatives across the tuning range, the margin
Lipschitz constants, and the loss supremum used by the generalization
bound.  Everything is a closed-form evaluation; no data needed.
"""

import numpy as np

from alpha_lab import (
    loss_sup_bound,
    margin_alpha_loss,
    margin_lipschitz_constant,
    margin_loss_derivative,
    margin_loss_second_derivative,
)

ALPHAS = [0.3, 0.5, 0.77, 1.0, 1.44, 4.0, np.inf]
MARGINS = [-5.0, -1.0, 0.0, 1.0, 5.0]


def fmt(a):
    return "inf" if np.isinf(a) else f"{a:g}"


print("margin loss l(z) across the family")
print("z\\alpha   " + "".join(f"{fmt(a):>10}" for a in ALPHAS))
for z in MARGINS:
    row = "".join(f"{margin_alpha_loss(a, z):>10.4f}" for a in ALPHAS)
    print(f"z={z:+.1f}  {row}")

print("\nfirst and second derivatives at z = -1")
for a in ALPHAS:
    d1 = margin_loss_derivative(a, -1.0)
    d2 = margin_loss_second_derivative(a, -1.0)
    print(f"  alpha={fmt(a):>5}: l' = {d1:+.4f}   l'' = {d2:+.4f}")

print("\nconvexity boundary: l'' changes sign at z* = log(1 - 1/alpha) for alpha > 1")
for a in (1.44, 4.0, 16.0):
    zs = np.log(1 - 1 / a)
    print(f"  alpha={a:>5g}: z* = {zs:+.4f}, l''(z*) = {margin_loss_second_derivative(a, zs):+.2e}")

print("\nLipschitz constants over [-r0, r0] and loss suprema (r0 = sqrt(2))")
r0 = np.sqrt(2.0)
for a in ALPHAS:
    print(
        f"  alpha={fmt(a):>5}: C = {margin_lipschitz_constant(a, r0):.4f}   "
        f"D = {loss_sup_bound(a, r0):.4f}"
    )
