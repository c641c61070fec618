"""
Required Eb/N0 against rate
===========================

Density evolution predicts the SC word error rate of a design.  Bisecting
over Eb/N0 for a target WER traces the rate/power trade-off.  It can then be
compared with the coded-modulation limit and the Shannon bound for real
signals.
"""

# %%
from mlpolar.channels import ask_constellation
from mlpolar.harness import cm_limit_ebno, required_ebno, shannon_limit_ebno
from mlpolar.sbp import gray_labeling, sp_labeling

const = ask_constellation(4)
R = 2.0
for lab in (sp_labeling(4), gray_labeling(4)):
    for mN in (512, 2048, 8192):
        n = (mN // 4).bit_length() - 1
        eb = required_ebno(const, lab, n, int(R * 2 ** n), 1e-5)
        print(f"{lab.name:4s} mN={mN:5d}  Eb/N0 = {eb:.2f} dB")
print(f"C_cm limit {cm_limit_ebno(const, R):.2f} dB, Shannon {shannon_limit_ebno(R):.2f} dB")

# %%
# A short Monte-Carlo run through the same machinery the CLI uses.
from mlpolar.harness import SimConfig, run_simulation, simulation_table

cfg = SimConfig(scheme="ML-polar", m=4, labeling="SP", n=7, K=256, grid=[8.5, 9.0, 9.5],
                min_word_errors=50, max_words=20_000, batch=1000, seed=1)
print(simulation_table(cfg, run_simulation(cfg)).to_csv())
