"""Experiment drivers: Monte-Carlo error-rate simulation and figure data.

Every CSV starts with ``# key=value`` metadata lines (toolkit version,
config hash, seed, Eb/N0 convention) followed by a header row.  Nothing
time-dependent is written, so equal inputs give byte-identical files.
"""
import csv
import hashlib
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np
from scipy.optimize import brentq

from . import __version__, analysis, mlc
from .channels import (EBNO_CONVENTION, ERASURE, AwgnChannel, BecChannel, ask_constellation,
                       bec_transmit, ebno_to_sigma, make_rng, sigma_to_ebno)
from .polar import encode, sc_decode, select_frozen
from .sbp import labeling_by_name

SCHEMES = ("BEC-polar", "BPSK-polar", "ML-polar")


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


class DesignError(ValueError):
    """The requested code cannot be built (e.g. K out of range)."""


def _parse_list(text, cast=float):
    return [cast(v) for v in str(text).replace(" ", "").split(",") if v]


@dataclass
class SimConfig:
    """Monte-Carlo simulation settings.

    ``grid`` holds Eb/N0 values in dB, except for ``BEC-polar`` where it holds
    erasure probabilities.  Give either ``K`` or ``rate`` (bits per symbol).
    """

    scheme: str = "ML-polar"
    m: int = 1
    labeling: str = "SP"
    n: int = 7
    K: int = None
    rate: float = None
    grid: list = field(default_factory=lambda: [0.0])
    min_word_errors: int = 100
    max_words: int = 1_000_000
    batch: int = 1000
    seed: int = 0
    workers: int = 1
    design_ebno: float = None
    code_file: str = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}")
        if self.scheme != "ML-polar" and self.m != 1:
            raise ConfigError("binary schemes use m=1")
        if not self.grid:
            raise ConfigError("grid must not be empty")
        if self.min_word_errors <= 0 or self.max_words <= 0 or self.batch <= 0:
            raise ConfigError("stop rule and batch size must be positive")
        if self.workers < 1:
            raise ConfigError("need at least one worker")
        if self.K is None and self.rate is None and self.code_file is None:
            raise ConfigError("give K or rate")
        if self.scheme == "BEC-polar" and any(not 0 <= e <= 1 for e in self.grid):
            raise ConfigError("BEC grid values are erasure probabilities in [0, 1]")

    @property
    def N(self):
        return 2 ** self.n

    def info_size(self):
        K = self.K if self.K is not None else int(round(self.rate * self.N))
        if not 0 < K <= self.m * self.N:
            raise DesignError(f"K={K} infeasible for m={self.m}, N={self.N}")
        return K

    def to_text(self):
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, list):
                v = ",".join(repr(float(x)) for x in v)
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"

    def digest(self):
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


_ALIASES = {"ebno": "grid", "ebno_db": "grid", "epsilon": "grid", "labelling": "labeling"}


def parse_config(text, overrides=None):
    """Flat ``key=value`` text (``#`` comments) plus overrides -> :class:`SimConfig`."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        k, v = line.split("=", 1)
        raw[k.strip()] = v.strip()
    raw.update(overrides or {})
    return config_from_dict(raw)


def config_from_dict(raw):
    known = {f.name: f for f in fields(SimConfig)}
    kwargs = {}
    for key, value in raw.items():
        key = _ALIASES.get(key, key)
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            if key == "grid":
                value = _parse_list(value) if isinstance(value, str) else [float(v) for v in value]
            elif key in ("m", "n", "K", "min_word_errors", "max_words", "batch", "seed", "workers"):
                value = int(float(value))
            elif key in ("rate", "design_ebno"):
                value = float(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc
        kwargs[key] = value
    return SimConfig(**kwargs)


@dataclass
class SimRecord:
    ebno_db: float
    sigma: float
    words: int
    word_errors: int
    bit_errors: int
    K: int
    wall_time: float = 0.0
    epsilon: float = None

    @property
    def wer(self):
        return self.word_errors / self.words if self.words else 0.0

    @property
    def ber(self):
        return self.bit_errors / (self.words * self.K) if self.words and self.K else 0.0


class _Link:
    """Code plus channel at one grid point; ``run(count, rng)`` returns error counts."""

    def __init__(self, config, point):
        self.config = config
        scheme = config.scheme
        loaded = None
        if config.code_file:
            with open(config.code_file) as fh:
                loaded = mlc.design_from_text(fh.read())
            if loaded.m != config.m or loaded.n != config.n:
                raise ConfigError("code file does not match m and n")
            self.K = loaded.K
        else:
            self.K = config.info_size()
        self.rate = self.K / config.N
        self.epsilon = point if scheme == "BEC-polar" else None
        self.ebno_db = float("nan") if scheme == "BEC-polar" else point
        self.sigma = float("nan") if scheme == "BEC-polar" else ebno_to_sigma(point, self.rate)
        if loaded is not None:
            self.code = loaded if scheme == "ML-polar" else loaded.components[0]
            return
        if scheme == "BEC-polar":
            self.code = select_frozen(analysis.bec_profile(point, config.n), self.K)
            return
        design_sigma = (self.sigma if config.design_ebno is None
                        else ebno_to_sigma(config.design_ebno, self.rate))
        if scheme == "BPSK-polar":
            prof = analysis.ga_profile(2.0 / design_sigma ** 2, config.n)
            self.code = select_frozen(prof, self.K)
        else:
            self.code = mlc.design(ask_constellation(config.m),
                                   labeling_by_name(config.labeling, config.m),
                                   config.n, self.K, design_sigma)

    def run(self, count, rng):
        K = self.K
        u = rng.integers(0, 2, size=(count, K), dtype=np.uint8)
        scheme = self.config.scheme
        if scheme == "BEC-polar":
            c = encode(self.code, u)
            r = bec_transmit(c, BecChannel(self.epsilon), rng)
            llr = np.where(r == ERASURE, 0.0, np.where(r == 0, np.inf, -np.inf))
            u_hat, _ = sc_decode(self.code, llr)
        elif scheme == "BPSK-polar":
            x = 1.0 - 2.0 * encode(self.code, u)
            y = AwgnChannel(self.sigma).transmit(x, rng)
            u_hat, _ = sc_decode(self.code, 2.0 * y / self.sigma ** 2)
        else:
            x = mlc.ml_encode(self.code, u)
            y = AwgnChannel(self.sigma).transmit(x, rng)
            u_hat, _ = mlc.msd_decode(self.code, y, self.sigma)
        wrong = u_hat.reshape(count, K) != u
        return int(np.count_nonzero(wrong.any(axis=1))), int(np.count_nonzero(wrong))


def _simulate_point(config, index, link):
    """Run blocks in index order until the stop rule fires.

    Block ``b`` draws from stream ``(seed, index, b)`` and its size depends on
    ``b`` only, so the totals do not depend on the worker count.
    """
    words = word_errors = bit_errors = 0
    block = 0
    pool = ThreadPoolExecutor(config.workers) if config.workers > 1 else None
    try:
        while word_errors < config.min_word_errors and words < config.max_words:
            sizes = []
            for b in range(block, block + config.workers):
                start = b * config.batch
                if start >= config.max_words:
                    break
                sizes.append((b, min(config.batch, config.max_words - start)))
            jobs = [(size, make_rng(config.seed, index, b)) for b, size in sizes]
            if pool is None:
                results = [link.run(size, rng) for size, rng in jobs]
            else:
                results = list(pool.map(lambda job: link.run(*job), jobs))
            for (b, size), (we, be) in zip(sizes, results):
                words += size
                word_errors += we
                bit_errors += be
                block = b + 1
                if word_errors >= config.min_word_errors or words >= config.max_words:
                    break
    finally:
        if pool is not None:
            pool.shutdown()
    return words, word_errors, bit_errors


def run_simulation(config):
    """Encode, transmit and decode until the stop rule at every grid point."""
    records = []
    for index, point in enumerate(config.grid):
        t0 = time.perf_counter()
        link = _Link(config, point)
        words, we, be = _simulate_point(config, index, link)
        records.append(SimRecord(link.ebno_db, link.sigma, words, we, be, link.K,
                                 time.perf_counter() - t0, link.epsilon))
    return records


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

@dataclass
class Table:
    columns: list
    rows: list
    meta: dict

    def to_csv(self):
        out = io.StringIO(newline="")
        meta = {"toolkit": f"mlpolar {__version__}", **self.meta}
        for k, v in meta.items():
            out.write(f"# {k}={v}\n")
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows([_fmt(v) for v in row] for row in self.rows)
        return out.getvalue()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _meta_hash(meta):
    text = "\n".join(f"{k}={v}" for k, v in sorted(meta.items()))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def simulation_table(config, records):
    first = "epsilon" if config.scheme == "BEC-polar" else "ebno_db"
    rows = []
    for r in records:
        x = r.epsilon if config.scheme == "BEC-polar" else r.ebno_db
        rows.append((float(x), float(r.sigma), r.words, r.word_errors, r.bit_errors,
                     float(r.wer), float(r.ber)))
    meta = {"config_hash": config.digest(), "seed": config.seed, "scheme": config.scheme,
            "m": config.m, "labeling": config.labeling, "n": config.n,
            "ebno_convention": EBNO_CONVENTION}
    return Table([first, "sigma", "words", "word_errors", "bit_errors", "wer", "ber"], rows, meta)


# ---------------------------------------------------------------------------
# figure data
# ---------------------------------------------------------------------------

FIG1_N = (1, 2, 3, 8, 12, 20)
FIG1_EPS = tuple(round(0.05 * k, 2) for k in range(1, 20))


def fig1_data(n_list=FIG1_N, epsilon_grid=FIG1_EPS):
    """Bit-channel variance of BEC polar codes against capacity, plus the ``I(1-I)`` bound."""
    rows = []
    for n in n_list:
        for cap, var in analysis.variance_curve_bec(epsilon_grid, n):
            rows.append((float(cap), f"n={n}", float(var)))
    for e in epsilon_grid:
        cap = 1.0 - float(e)
        rows.append((cap, "bound", cap * (1.0 - cap)))
    meta = {"figure": "1", "channel": "BEC", "n": ",".join(map(str, n_list)),
            "epsilon": ",".join(repr(float(e)) for e in epsilon_grid)}
    meta["config_hash"] = _meta_hash(meta)
    meta["seed"] = "none"
    return Table(["x", "series", "value"], rows, meta)


def esn0_to_sigma(esn0_db):
    return math.sqrt(1.0 / (2.0 * 10.0 ** (esn0_db / 10.0)))


FIG2_SNR = tuple(float(s) for s in range(-20, 41, 2))


def fig2_data(m_list=(2, 4, 8), labelings=("SP", "GRAY"), snr_grid=FIG2_SNR,
              samples=200_000, seed=0, method="mc"):
    """Bit-level variance ``V`` against mean level capacity ``M`` for ASK labelings.

    ``snr_grid`` holds Es/N0 in dB.  Level profiles come from Monte Carlo
    (``method="mc"``, stream ``(seed, m, labeling index, grid index)``) or
    from quadrature.
    """
    rows = []
    for m in m_list:
        const = ask_constellation(m)
        for li, name in enumerate(labelings):
            lab = labeling_by_name(name, m)
            for k, snr in enumerate(snr_grid):
                sigma = esn0_to_sigma(snr)
                if method == "mc":
                    prof = analysis.mc_bit_level_profile(const, lab, sigma, samples,
                                                         make_rng(seed, m, li, k))
                else:
                    prof = analysis.level_capacities(const, lab, sigma)
                rows.append((prof.mean(), f"m={m}/{lab.name}", prof.variance()))
    meta = {"figure": "2", "channel": "AWGN", "m": ",".join(map(str, m_list)),
            "labelings": ",".join(labelings), "esn0_db": ",".join(map(repr, snr_grid)),
            "method": method, "samples": samples if method == "mc" else "none"}
    meta["config_hash"] = _meta_hash({**meta, "seed": seed})
    meta["seed"] = seed if method == "mc" else "none"
    return Table(["x", "series", "value"], rows, meta)


def de_wer(constellation, labeling, n, K, ebno_db):
    """WER predicted by GA density evolution for the best K of mN channels."""
    N = 2 ** n
    sigma = ebno_to_sigma(ebno_db, K / N)
    levels = analysis.level_capacities(constellation, labeling, sigma)
    pe = mlc.pooled_profile(levels, n).error_probs
    return float(-np.expm1(np.sum(np.log1p(-np.sort(pe)[:K]))))


def required_ebno(constellation, labeling, n, K, target_wer, lo=None, hi=40.0, tol=0.01):
    """Smallest Eb/N0 (dB, to ``tol``) whose DE-predicted WER is at most ``target_wer``."""
    rate = K / 2 ** n
    if not 0 < rate < constellation.m:
        raise DesignError("rate must lie strictly between 0 and m")
    if lo is None:
        lo = cm_limit_ebno(constellation, rate) - 0.5
    if de_wer(constellation, labeling, n, K, hi) > target_wer:
        return float("nan")
    while de_wer(constellation, labeling, n, K, lo) <= target_wer:
        lo -= 3.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if de_wer(constellation, labeling, n, K, mid) <= target_wer:
            hi = mid
        else:
            lo = mid
    return hi


def cm_limit_ebno(constellation, rate):
    """Eb/N0 (dB) at which the coded-modulation capacity equals ``rate``."""
    if not 0 < rate < constellation.m:
        raise DesignError("rate must lie strictly between 0 and m")
    f = lambda s: analysis.cm_capacity(constellation, s) - rate
    sigma = brentq(f, 1e-3, 1e3, xtol=1e-12, rtol=1e-12)
    return sigma_to_ebno(sigma, rate)


def shannon_limit_ebno(rate):
    """Eb/N0 (dB) solving ``rate = 0.5 log2(1 + 2 rate Eb/N0)``."""
    return 10.0 * math.log10((2.0 ** (2.0 * rate) - 1.0) / (2.0 * rate))


FIG3_RATES = tuple(0.25 * k for k in range(1, 16))


def fig3_data(mN_list=(2 ** 9, 2 ** 11, 2 ** 13, 2 ** 15), labelings=("SP", "GRAY"),
              target_wer=1e-5, rate_grid=FIG3_RATES, m=4):
    """Rate against required Eb/N0 for multilevel polar codes on 2^m-ASK, via DE.

    Also emits the coded-modulation limit and the real-constellation Shannon bound.
    """
    const = ask_constellation(m)
    rows = []
    for name in labelings:
        lab = labeling_by_name(name, m)
        for mN in mN_list:
            if mN % m or (mN // m) & (mN // m - 1):
                raise DesignError(f"mN={mN} is not m times a power of two")
            n = (mN // m).bit_length() - 1
            for R in rate_grid:
                if not 0 < R < m:
                    raise DesignError(f"rate {R} infeasible for m={m}")
                K = int(round(R * 2 ** n))
                eb = required_ebno(const, lab, n, K, target_wer)
                rows.append((eb, f"{lab.name}/mN={mN}", K / 2 ** n))
    for R in rate_grid:
        rows.append((cm_limit_ebno(const, R), "C_cm", float(R)))
    for R in rate_grid:
        rows.append((shannon_limit_ebno(R), "shannon", float(R)))
    meta = {"figure": "3", "channel": "AWGN", "m": m, "labelings": ",".join(labelings),
            "mN": ",".join(map(str, mN_list)), "target_wer": repr(target_wer),
            "rates": ",".join(map(repr, rate_grid)), "method": "GA density evolution",
            "ebno_convention": EBNO_CONVENTION}
    meta["config_hash"] = _meta_hash(meta)
    meta["seed"] = "none"
    return Table(["x", "series", "value"], rows, meta)
