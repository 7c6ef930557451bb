"""
Reading the Lamb-Dicke parameter off a rate ratio
=================================================

"""

# A single measured ratio of two sideband Rabi frequencies fixes eta.  The
# ratio does not depend on the base Rabi frequency, so nothing else needs
# calibrating first.

import numpy as np

from ladder_synth import CouplingModel, eta_from_ratio, laguerre, pair_rate
from ladder_synth.errors import NoRootError

eta = eta_from_ratio(0.60, (3, 1), (0, 1))
print(f"eta from Omega_34/Omega_01 = 0.60:  {eta:.12f}")

# The same number from the explicit polynomial.  For these two pairs the
# ratio is L_3^1(eta^2)/2.

x = eta**2
print(f"L_3^1(eta^2)/2 = {laguerre(3, 1, x) / 2:.12f}")

# Rates for the first few first-sideband pairs.  Far enough up the ladder
# the rate passes through zero and comes back with opposite sign.

model = CouplingModel(eta=eta)
print("\n  n   Omega(n,n+1)/Omega(0,1)")
for n in range(10):
    print(f"{n:>3}   {pair_rate(model, n, n + 1) / pair_rate(model, 0, 1):+.4f}")

# Scanning the ratio over eta shows why the smallest root is the one to
# take: further roots exist once the Laguerre polynomial turns over.

for e in np.linspace(0.1, 1.9, 10):
    m = CouplingModel(eta=e)
    print(f"eta = {e:.2f}   ratio = {pair_rate(m, 3, 4) / pair_rate(m, 0, 1):+.4f}")

# Some ratios simply cannot be reached for any eta below 2.

try:
    eta_from_ratio(5.0, (3, 0), (0, 0))
except NoRootError as exc:
    print(f"\n{exc}")
