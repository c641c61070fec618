"""
A multilevel polar code on 16-ASK
=================================

Design picks the K most reliable of the m*N bit channels jointly, using the
Gaussian approximation per level.  Multistage decoding then runs SC level by
level, demapping with the decisions of the lower levels.
"""

# %%
import numpy as np

from mlpolar.channels import AwgnChannel, ask_constellation, awgn_transmit, ebno_to_sigma, make_rng
from mlpolar.mlc import design, design_to_text, ml_encode, msd_decode
from mlpolar.sbp import sp_labeling

m, n, K = 4, 7, 256  # mN = 512, two bits per symbol
ebno = 9.12
sigma = ebno_to_sigma(ebno, K / 2 ** n)
code = design(ask_constellation(m), sp_labeling(m), n, K, sigma)
print("level rates:", code.level_rates())
print("predicted WER:", code.predicted_wer)

# %%
rng = make_rng(3)
bits = rng.integers(0, 2, (5000, K), dtype=np.uint8)
y = awgn_transmit(ml_encode(code, bits), AwgnChannel(sigma), rng)
decoded, trace = msd_decode(code, y, sigma)
print("simulated WER:", np.mean(np.any(decoded != bits, axis=1)))

# %%
# The design round-trips through its text form (what `mlpolar design` writes).
print(design_to_text(code)[:200], "...")
