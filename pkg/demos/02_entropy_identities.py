"""Conditional-entropy identities behind the loss family.

Shows the tilted posterior of a binomial pmf sharpening/flattening with
the tuning value, and verifies on a random joint pmf that the closed
form for the minimal risk matches a brute-force simplex search.
"""

import numpy as np
from scipy.stats import binom

from alpha_lab import (
    arimoto_conditional_entropy,
    brute_force_minimal_risk,
    min_conditional_risk,
    minimal_alpha_risk,
    optimal_classifier,
    tilt_posterior,
)

print("tilted (20, 0.5)-binomial posterior, mass on outcomes 8..12")
pmf = binom.pmf(np.arange(21), 20, 0.5)
for a in (0.5, 1.0, 3.0, np.inf):
    t = tilt_posterior(pmf, a)
    label = "inf" if np.isinf(a) else f"{a:g}"
    print(f"  alpha={label:>4}: " + " ".join(f"{t[k]:.4f}" for k in range(8, 13)))

rng = np.random.default_rng(7)
joint = rng.random((3, 3)) + 0.05
joint /= joint.sum()
print("\nminimal risk identity vs simplex enumeration on a random 3x3 joint")
for a in (0.5, 1.0, 2.0, np.inf):
    closed = minimal_alpha_risk(joint, a)
    brute = brute_force_minimal_risk(joint, a)
    h = arimoto_conditional_entropy(joint, a)
    label = "inf" if np.isinf(a) else f"{a:g}"
    print(f"  alpha={label:>4}: closed={closed:.6f}  brute={brute:.6f}  H_alpha={h:.4f}")

print("\nminimum conditional risk and its minimizer at eta = 0.8")
for a in (0.5, 1.0, 2.0, np.inf):
    label = "inf" if np.isinf(a) else f"{a:g}"
    print(
        f"  alpha={label:>4}: C*(0.8) = {min_conditional_risk(0.8, a):.4f}"
        f"   f*(0.8) = {optimal_classifier(0.8, a):.4f}"
    )
