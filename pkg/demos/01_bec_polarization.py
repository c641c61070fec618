"""
Polarization on the binary erasure channel
==========================================

Bit-channel capacities of a length-2^n polar code over a BEC follow an
exact two-branch recursion.  Their variance grows with n towards I(1 - I).
"""

# %%
import numpy as np

from mlpolar.analysis import bec_polarize, variance_curve_bec
from mlpolar.sbp import compose_variance, profile_variance

caps = 1 - bec_polarize(0.5, 2)
print("capacities, eps=0.5, n=2:", caps)
print("variance:", profile_variance(caps))

# %%
# The same variance from one kernel step plus the variances of its two children.
outer = 1 - bec_polarize(0.5, 1)
inner = [profile_variance(1 - bec_polarize(1 - c, 1)) for c in outer]
print("composed:", compose_variance(outer, inner))

# %%
# Variance against capacity for growing block length.
grid = np.round(np.arange(0.05, 0.96, 0.05), 2)
for n in (1, 2, 3, 8, 12, 20):
    V = variance_curve_bec(grid, n)[:, 1]
    print(f"n={n:2d}  V(I=0.5)={V[9]:.6f}  max gap to bound={np.max(grid * (1 - grid) - V):.4f}")

# %%
# The same data as CSV, ready for plotting.
from mlpolar.harness import fig1_data

print(fig1_data((1, 2, 3), (0.25, 0.5, 0.75)).to_csv())
