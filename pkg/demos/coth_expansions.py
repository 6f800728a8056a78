"""How fast do pole expansions of coth converge?

Thermal factors enter every finite-temperature correlation function through
coth(w / 2T). Replacing coth by a finite sum of poles turns the frequency
integral into a finite sum of exponentials, and the number of poles sets
the number of extra exponentials. This script tabulates the worst relative
error on x in [0.1, 10] for the Matsubara sum and for the Pade expansion.
"""

import numpy as np

from bcfkit import expansion_error, matsubara, pade

print(f"{'L':>3} {'Matsubara':>12} {'Pade':>12}")
for L in (1, 2, 3, 5, 8, 12):
    m = expansion_error(matsubara(L), 0.1, 10.0)
    p = expansion_error(pade(L), 0.1, 10.0)
    print(f"{L:>3} {m:12.3e} {p:12.3e}")

# The Matsubara error decays only like 1/L because the omitted poles each
# contribute 2x / (x^2 + (pi l)^2). Pade places its poles to match the
# Taylor series of coth, so its error collapses once the poles move past
# the range of interest.
c = pade(1)
print(f"\nPade L=1: xi = {c.xi[0]:.12f} (sqrt(15) = {np.sqrt(15):.12f}), eta = {c.eta[0]}")
