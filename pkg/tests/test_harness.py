import csv
import io
import math
import pathlib
import subprocess
import sys

import numpy as np
import pytest

from mlpolar import cli
from mlpolar.analysis import cm_capacity
from mlpolar.channels import ask_constellation, ebno_to_sigma
from mlpolar.harness import (ConfigError, DesignError, SimConfig, SimRecord, cm_limit_ebno,
                             de_wer, fig1_data, fig2_data, fig3_data, parse_config,
                             required_ebno, run_simulation, shannon_limit_ebno,
                             simulation_table)
from mlpolar.mlc import design_from_text, ml_encode
from mlpolar.sbp import sp_labeling

from oracles import bec_capacities_by_enumeration

DATA = pathlib.Path(__file__).parent / "data"


def _rows(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def _meta(text):
    return dict(ln[2:].split("=", 1) for ln in text.splitlines() if ln.startswith("# "))


# --- config -------------------------------------------------------------------

def test_parse_config_and_overrides():
    text = "# comment\nscheme=ML-polar\nm=4\nlabeling=SP\nn=5\nK=64\nebno=6,7.5\nseed=3\n"
    cfg = parse_config(text, {"workers": "2"})
    assert cfg.m == 4 and cfg.K == 64 and cfg.grid == [6.0, 7.5] and cfg.workers == 2
    assert cfg.N == 32 and cfg.info_size() == 64


@pytest.mark.parametrize("text", [
    "scheme=LDPC\nK=3\n",
    "K=3\nebno=\n",
    "K=3\nmin_word_errors=0\n",
    "K=3\nfoo=1\n",
    "K=abc\n",
    "scheme=BPSK-polar\nm=2\nK=3\n",
    "scheme=BEC-polar\nK=3\nepsilon=1.5\n",
    "n=4\n",
    "just a line\n",
])
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_infeasible_k_is_design_error():
    cfg = SimConfig(m=2, n=3, K=17)
    with pytest.raises(DesignError):
        cfg.info_size()


def test_rate_gives_k():
    assert SimConfig(m=4, n=7, rate=2.0).info_size() == 256


def test_record_rates():
    r = SimRecord(1.0, 0.5, words=200, word_errors=10, bit_errors=30, K=6)
    assert r.wer == 0.05 and r.ber == 30 / 1200


# --- simulation ---------------------------------------------------------------

def test_noiseless_point_runs_to_max_words():
    cfg = SimConfig(scheme="ML-polar", m=2, n=4, K=20, grid=[80.0], max_words=2500, batch=1000)
    (rec,) = run_simulation(cfg)
    assert rec.words == 2500 and rec.word_errors == 0 and rec.bit_errors == 0


def test_stop_rule_on_word_errors():
    cfg = SimConfig(scheme="BPSK-polar", n=5, K=16, grid=[-2.0], min_word_errors=50,
                    max_words=10 ** 6, batch=100)
    (rec,) = run_simulation(cfg)
    assert rec.word_errors >= 50 and rec.words < 10 ** 6
    assert rec.words % 100 == 0


def test_simulation_csv_deterministic():
    cfg = SimConfig(scheme="ML-polar", m=2, labeling="GRAY", n=4, K=16, grid=[3.0, 5.0],
                    min_word_errors=30, max_words=20000, batch=500, seed=7)
    a = simulation_table(cfg, run_simulation(cfg)).to_csv()
    b = simulation_table(cfg, run_simulation(cfg)).to_csv()
    assert a == b
    meta = _meta(a)
    assert meta["seed"] == "7" and meta["toolkit"].startswith("mlpolar ")
    assert meta["config_hash"] == cfg.digest()
    assert "ebno_convention" in meta
    rows = _rows(a)
    assert [float(r["ebno_db"]) for r in rows] == [3.0, 5.0]
    for r in rows:
        assert float(r["wer"]) == int(r["word_errors"]) / int(r["words"])
        assert float(r["ber"]) == int(r["bit_errors"]) / (int(r["words"]) * 16)


@pytest.mark.parametrize("scheme,extra", [("ML-polar", {"m": 3}), ("BPSK-polar", {}),
                                          ("BEC-polar", {"grid": [0.4]})])
def test_worker_count_independence(scheme, extra):
    base = dict(scheme=scheme, n=4, K=8, grid=[2.0], min_word_errors=40, max_words=30000,
                batch=300, seed=11)
    base.update(extra)
    one = run_simulation(SimConfig(workers=1, **base))
    three = run_simulation(SimConfig(workers=3, **base))
    for a, b in zip(one, three):
        assert (a.words, a.word_errors, a.bit_errors) == (b.words, b.word_errors, b.bit_errors)


def test_different_seed_changes_counts():
    base = dict(scheme="BPSK-polar", n=4, K=8, grid=[1.0], min_word_errors=10 ** 6,
                max_words=5000, batch=1000)
    a = run_simulation(SimConfig(seed=1, **base))[0]
    b = run_simulation(SimConfig(seed=2, **base))[0]
    assert a.bit_errors != b.bit_errors


def test_bec_simulation_matches_prediction():
    eps, n, K = 0.3, 5, 16
    cfg = SimConfig(scheme="BEC-polar", n=n, K=K, grid=[eps], min_word_errors=10 ** 9,
                    max_words=40000, batch=4000, seed=5)
    (rec,) = run_simulation(cfg)
    from mlpolar.analysis import bec_profile
    from mlpolar.polar import select_frozen, wer_sc
    prof = bec_profile(eps, n)
    pred = wer_sc(prof.error_probs, select_frozen(prof, K).info_set)
    # SC on the BEC fails exactly when some information erasure is guessed wrong,
    # and the first failure costs a fair coin; the union form is an upper bound
    assert rec.wer <= pred * 1.2 + 0.002


def test_code_file_is_used(tmp_path):
    design_txt = tmp_path / "code.txt"
    assert cli.main(["design", "m=2", "n=4", "K=16", "ebno=6", "labeling=GRAY",
                     "-o", str(design_txt)]) == 0
    cfg = SimConfig(scheme="ML-polar", m=2, n=4, code_file=str(design_txt), grid=[6.0],
                    min_word_errors=5, max_words=2000, batch=500)
    (rec,) = run_simulation(cfg)
    assert rec.K == 16
    with pytest.raises(ConfigError):
        run_simulation(SimConfig(scheme="ML-polar", m=2, n=5, code_file=str(design_txt)))


# --- figure data --------------------------------------------------------------

def test_fig1_golden_file():
    out = fig1_data((1, 2, 3), (0.25, 0.5, 0.75)).to_csv()
    assert out == (DATA / "fig1_small.csv").read_text()


def test_fig1_values_match_enumeration():
    rows = _rows(fig1_data((1, 2, 3), (0.25, 0.5, 0.75)).to_csv())
    for r in rows:
        if r["series"] == "bound":
            cap = float(r["x"])
            assert float(r["value"]) == cap * (1 - cap)
            continue
        n = int(r["series"][2:])
        ref = np.var(bec_capacities_by_enumeration(1 - float(r["x"]), n))
        assert float(r["value"]) == pytest.approx(ref, abs=1e-12)


def test_fig1_examples():
    rows = _rows(fig1_data((1, 12, 20), (0.5, 0.3)).to_csv())
    val = {(r["series"], float(r["x"])): float(r["value"]) for r in rows}
    assert val[("bound", 0.5)] == 0.25
    assert val[("n=1", 0.5)] == 0.0625
    for x in (0.5, 0.7):
        assert val[("n=20", x)] >= val[("n=12", x)]


def test_fig2_shape_and_extremes():
    snr = (-30.0, 0.0, 10.0, 60.0)
    rows = _rows(fig2_data((2,), ("SP", "GRAY"), snr, samples=4000, seed=1).to_csv())
    assert len(rows) == 8
    by = {}
    for r in rows:
        by.setdefault(r["series"], []).append((float(r["x"]), float(r["value"])))
    assert set(by) == {"m=2/SP", "m=2/GRAY"}
    for pts in by.values():
        (x_lo, v_lo), (x_hi, v_hi) = pts[0], pts[-1]
        assert x_lo < 0.01 and v_lo < 1e-3
        assert x_hi > 0.999 and v_hi < 1e-6


def test_fig2_quadrature_sp_above_gray():
    snr = tuple(float(s) for s in range(4, 30, 2))
    rows = _rows(fig2_data((4,), ("SP", "GRAY"), snr, method="quadrature").to_csv())
    sp = [(float(r["x"]), float(r["value"])) for r in rows if r["series"] == "m=4/SP"]
    gray = [(float(r["x"]), float(r["value"])) for r in rows if r["series"] == "m=4/GRAY"]
    for (xs, vs), (xg, vg) in zip(sp, gray):
        assert xs == pytest.approx(xg, abs=1e-12)  # same C_cm / m
        if 0.5 <= xs <= 0.9:
            assert vs > vg


def test_shannon_limit():
    assert shannon_limit_ebno(0.5) == pytest.approx(0.0, abs=1e-12)
    assert shannon_limit_ebno(1.0) == pytest.approx(10 * math.log10(1.5), abs=1e-12)


def test_cm_limit_right_of_shannon():
    c = ask_constellation(4)
    for R in (0.5, 2.0, 3.5):
        eb = cm_limit_ebno(c, R)
        assert eb > shannon_limit_ebno(R)
        assert cm_capacity(c, ebno_to_sigma(eb, R)) == pytest.approx(R, abs=1e-9)
    with pytest.raises(DesignError):
        cm_limit_ebno(c, 4.0)


def test_required_ebno_is_threshold():
    c, lab = ask_constellation(2), sp_labeling(2)
    eb = required_ebno(c, lab, 6, 64, 1e-3)
    assert de_wer(c, lab, 6, 64, eb) <= 1e-3
    assert de_wer(c, lab, 6, 64, eb - 0.011) > 1e-3


def test_fig3_small_grid_properties():
    text = fig3_data((128,), ("SP",), 1e-3, (0.5, 1.0, 2.0, 3.0)).to_csv()
    rows = _rows(text)
    sp = [(float(r["value"]), float(r["x"])) for r in rows if r["series"] == "SP/mN=128"]
    cm = {float(r["value"]): float(r["x"]) for r in rows if r["series"] == "C_cm"}
    sh = {float(r["value"]): float(r["x"]) for r in rows if r["series"] == "shannon"}
    ebs = [eb for _, eb in sp]
    assert ebs == sorted(ebs)
    for R, eb in sp:
        assert eb > cm[R] > sh[R]
    with pytest.raises(DesignError):
        fig3_data((128,), ("SP",), 1e-3, (4.0,))


# --- command line ---------------------------------------------------------------

def test_cli_fig1_matches_golden(tmp_path, capsys):
    assert cli.main(["fig1", "n=1,2,3", "epsilon=0.25,0.5,0.75"]) == 0
    assert capsys.readouterr().out == (DATA / "fig1_small.csv").read_text()


def test_cli_config_file_and_override(tmp_path):
    cfg = tmp_path / "sim.cfg"
    cfg.write_text("scheme=BPSK-polar\nn=4\nK=8\nebno=2\nmax_words=3000\nbatch=1000\nseed=4\n")
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["simulate", "--config", str(cfg), "-o", str(out1)]) == 0
    assert cli.main(["simulate", "--config", str(cfg), "-o", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert b"\r" not in out1.read_bytes()
    out3 = tmp_path / "c.csv"
    assert cli.main(["simulate", "--config", str(cfg), "seed=5", "-o", str(out3)]) == 0
    assert _meta(out3.read_text())["seed"] == "5"


def test_cli_design_encode_decode(tmp_path, capsys):
    code_path = tmp_path / "code.txt"
    assert cli.main(["design", "m=3", "n=4", "K=30", "ebno=9", "labeling=SP",
                     "-o", str(code_path)]) == 0
    code = design_from_text(code_path.read_text())
    bits = "".join(np.random.default_rng(2).integers(0, 2, 30).astype(str))
    assert cli.main(["encode", f"code={code_path}", f"bits={bits}"]) == 0
    symbols = [float(v) for v in capsys.readouterr().out.split()]
    np.testing.assert_array_equal(symbols, ml_encode(code, np.array(list(bits), dtype=np.uint8)))
    received = tmp_path / "y.txt"
    received.write_text("\n".join(repr(v) for v in symbols) + "\n")
    assert cli.main(["decode", f"code={code_path}", f"received={received}", "sigma=0.001"]) == 0
    assert capsys.readouterr().out.strip() == bits


@pytest.mark.parametrize("argv,code", [
    (["design", "m=4", "n=7", "K=999", "ebno=9"], 2),
    (["design", "m=2", "n=3", "rate=2.5", "ebno=9"], 2),
    (["design", "m=2", "n=3", "K=4", "ebno=9", "colour=red"], 1),
    (["design", "m=2", "K=4", "ebno=9"], 1),
    (["simulate", "scheme=ML-polar", "m=2", "n=3", "K=40"], 2),
    (["simulate", "scheme=nope", "K=4"], 1),
    (["simulate", "--config", "/nonexistent/file.cfg"], 1),
    (["fig1", "n=x"], 1),
    (["encode", "code=/nonexistent", "bits=0"], 1),
    (["fig3", "mN=128", "labelings=SP", "rates=4.0"], 2),
])
def test_cli_exit_codes(argv, code, capsys):
    assert cli.main(argv) == code
    assert "mlpolar:" in capsys.readouterr().err


def test_cli_encode_rejects_wrong_bit_count(tmp_path):
    code_path = tmp_path / "code.txt"
    cli.main(["design", "m=2", "n=2", "K=4", "sigma=0.3", "-o", str(code_path)])
    assert cli.main(["encode", f"code={code_path}", "bits=010"]) == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mlpolar", "fig1", "n=1", "epsilon=0.5"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "0.5,n=1,0.0625" in proc.stdout
