"""Sharp constants and the Gaussian triples that attain them.

For an admissible exponent triple p (reciprocals summing to 2) the best
constant in the convolution inequality is A_p^m on R^m.  Gaussians whose
quadratic forms are scaled copies of one another -- with the weights
gamma(p) -- attain it exactly.  This script prints the constants, shows
the attainment in dimensions 1..3, and rediscovers the weights by scan.
"""

import numpy as np

from heisyoung import (
    compatible_euclid_triple,
    exponent_profile,
    phi_ratio,
)

for p in ((1.5, 1.5, 1.5), (4.0 / 3.0, 4.0 / 3.0, 2.0), (1.25, 2.0, 10.0 / 7.0)):
    prof = exponent_profile(p)
    print(f"p = ({p[0]:.4f}, {p[1]:.4f}, {p[2]:.4f})")
    print(f"  A_p    = {prof.sharp:.12f}")
    print(f"  gamma  = ({prof.gamma[0]:.6f}, {prof.gamma[1]:.6f}, {prof.gamma[2]:.6f})")
    for m in (1, 2, 3):
        gs = compatible_euclid_triple(prof, np.eye(m))
        print(f"  dim {m}: phi on the compatible triple = {phi_ratio(gs, prof):.12f}"
              f"   (A_p^{m} = {prof.sharp**m:.12f})")
    print()

# a coarse scan over the two free weights lands on gamma(p)
prof = exponent_profile((4.0 / 3.0, 4.0 / 3.0, 2.0))
from heisyoung import GaussianR, lp_norm, trilinear_euclid

best, best_pair = -1.0, None
for g2 in np.linspace(0.5, 1.5, 41):
    for g3 in np.linspace(0.2, 1.2, 41):
        gs = [GaussianR(Q=np.array([[g]]), a=np.zeros(1), b=np.zeros(1))
              for g in (1.0, g2, g3)]
        phi = abs(trilinear_euclid(*gs)) / np.prod(
            [lp_norm(g, q) for g, q in zip(gs, prof.p)]
        )
        if phi > best:
            best, best_pair = phi, (g2, g3)

print("scan over weight pairs for p = (4/3, 4/3, 2):")
print(f"  best phi {best:.9f} at (g2, g3) = ({best_pair[0]:.3f}, {best_pair[1]:.3f})")
print(f"  formula  {prof.sharp:.9f} at (g2, g3) = "
      f"({prof.gamma[1]:.3f}, {prof.gamma[2]:.3f})")
