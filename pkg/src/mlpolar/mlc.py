"""Multilevel polar codes over 2^m-ASK with multistage decoding.

The mN bit channels are indexed globally as ``N * i + j`` (level ``i``,
component position ``j``), the product order of the labeling partition
followed by the length-N polar transform.  Frozen channels are chosen jointly
over all levels; per-level rates fall out of that choice.
"""
from dataclasses import dataclass, field

import numpy as np

from . import analysis
from .channels import Constellation, ask_constellation
from .polar import (PolarCode, best_indices, bit_reversal, generator_matrix,
                    polar_transform, sc_decode_full, wer_sc)
from .sbp import (CapacityProfile, Labeling, compose_variance, labeling_by_name,
                  permutation_matrix)

# capacities this close to one are mapped to a finite Gaussian surrogate
_MAX_LEVEL_CAPACITY = 1.0 - 1e-15


@dataclass(frozen=True, eq=False)
class MultilevelPolarCode:
    constellation: Constellation
    labeling: Labeling
    n: int
    info_set: np.ndarray
    frozen_values: np.ndarray = None
    sigma: float = None
    error_probs: np.ndarray = None
    predicted_wer: float = None
    components: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.constellation.m != self.labeling.m:
            raise ValueError("constellation and labeling orders differ")
        m, N = self.labeling.m, 2 ** self.n
        info = np.sort(np.asarray(self.info_set, dtype=np.int64).ravel())
        if np.unique(info).size != info.size or (info.size and (info[0] < 0 or info[-1] >= m * N)):
            raise ValueError("information set must hold distinct indices in [0, mN)")
        fv = self.frozen_values
        fv = np.zeros(m * N - info.size, np.uint8) if fv is None else np.asarray(fv, np.uint8).ravel()
        if fv.size != m * N - info.size:
            raise ValueError("need one frozen bit per frozen index")
        mask = np.ones(m * N, dtype=bool)
        mask[info] = False
        frozen_word = np.zeros(m * N, dtype=np.uint8)
        frozen_word[mask] = fv
        comps = []
        for i in range(m):
            sl = slice(i * N, (i + 1) * N)
            local = np.flatnonzero(~mask[sl])
            comps.append(PolarCode(self.n, local, frozen_word[sl][mask[sl]]))
        if self.error_probs is not None:
            ep = np.asarray(self.error_probs, dtype=float)
            if ep.shape != (m * N,):
                raise ValueError("need one error probability per bit channel")
            ep.setflags(write=False)
            object.__setattr__(self, "error_probs", ep)
            if self.predicted_wer is None:
                object.__setattr__(self, "predicted_wer", wer_sc(ep, info))
        info.setflags(write=False)
        fv.setflags(write=False)
        object.__setattr__(self, "info_set", info)
        object.__setattr__(self, "frozen_values", fv)
        object.__setattr__(self, "components", tuple(comps))

    @property
    def m(self):
        return self.labeling.m

    @property
    def N(self):
        return 2 ** self.n

    @property
    def K(self):
        return self.info_set.size

    @property
    def rate(self):
        """Bits per ASK symbol."""
        return self.K / self.N

    def level_sizes(self):
        return np.array([c.K for c in self.components])

    def level_rates(self):
        return self.level_sizes() / self.N

    def frozen_word(self):
        return np.concatenate([c.frozen_word() for c in self.components])

    def __eq__(self, other):
        return (isinstance(other, MultilevelPolarCode) and self.n == other.n
                and self.constellation == other.constellation
                and self.labeling == other.labeling
                and np.array_equal(self.info_set, other.info_set)
                and np.array_equal(self.frozen_values, other.frozen_values))


def level_profile(constellation, labeling, sigma, method="quadrature", samples=200_000, rng=None):
    if method == "quadrature":
        return analysis.level_capacities(constellation, labeling, sigma)
    if method == "mc":
        if rng is None:
            raise ValueError("Monte-Carlo level profile needs a generator")
        return analysis.mc_bit_level_profile(constellation, labeling, sigma, samples, rng)
    raise ValueError("method must be 'quadrature' or 'mc'")


def pooled_profile(levels, n):
    """GA density evolution of every level; returns the mN-channel profile.

    ``levels`` is the m-level capacity profile of the labeling partition.
    """
    caps = np.minimum(np.asarray(levels.values if isinstance(levels, CapacityProfile) else levels,
                                 dtype=float), _MAX_LEVEL_CAPACITY)
    means = np.concatenate([analysis.ga_polarize(analysis.ga_mean_from_capacity(c), n)
                            for c in caps])
    return CapacityProfile(analysis.ga_capacity(means), analysis.pe_from_mean(means), means)


def design(constellation, labeling, n, K, sigma, method="quadrature", samples=200_000, rng=None):
    """Choose the K most reliable of the mN bit channels at noise level ``sigma``.

    Level capacities are mapped to Gaussian surrogates and evolved with the
    GA; ties freeze the lower global index.
    """
    m = labeling.m
    if not 0 <= K <= m * 2 ** n:
        raise ValueError(f"K must lie in [0, {m * 2 ** n}]")
    levels = level_profile(constellation, labeling, sigma, method, samples, rng)
    pooled = pooled_profile(levels, n)
    info = best_indices(pooled.error_probs, K)
    return MultilevelPolarCode(constellation, labeling, n, info, sigma=float(sigma),
                               error_probs=pooled.error_probs)


def capacity_rule_rates(levels):
    """Per-level rates ``R_i = I(B_i)`` (diagnostic only)."""
    return np.asarray(levels.values if isinstance(levels, CapacityProfile) else levels, float).copy()


def _scatter(code, info_bits):
    info_bits = np.asarray(info_bits, dtype=np.uint8)
    if info_bits.shape[-1:] != (code.K,):
        raise ValueError(f"expected {code.K} information bits, got shape {info_bits.shape}")
    u = np.broadcast_to(code.frozen_word(), info_bits.shape[:-1] + (code.m * code.N,)).copy()
    u[..., code.info_set] = info_bits
    return u.reshape(info_bits.shape[:-1] + (code.m, code.N))


def ml_codebits(code, info_bits):
    """Component codewords, shape (..., m, N)."""
    u = _scatter(code, info_bits)
    return polar_transform(u[..., bit_reversal(code.n)])


def map_symbols(code_bits, constellation, labeling):
    """ASK points for code bits of shape (..., m, N); level ``i`` is label bit ``b_i``."""
    bits = np.asarray(code_bits, dtype=np.int64)
    weights = (1 << np.arange(bits.shape[-2]))[:, None]
    labels = np.sum(bits * weights, axis=-2)
    return constellation.points[labeling.point_of_label[labels]]


def ml_encode(code, info_bits):
    """Encode info bits (global index order) into N ASK symbols."""
    return map_symbols(ml_codebits(code, info_bits), code.constellation, code.labeling)


def ml_generator_matrix(m, n):
    """``P_{m,N} (G_N kron I_m)``: maps the global u-vector to symbol-major label bits."""
    N = 2 ** n
    P = permutation_matrix(m, N).astype(np.int64)
    return ((P @ np.kron(generator_matrix(n), np.eye(m, dtype=np.int64))) % 2).astype(np.uint8)


@dataclass
class MsdTrace:
    """Per-level decisions of one multistage decoding run."""

    level_u: np.ndarray
    level_codewords: np.ndarray
    symbols: np.ndarray


def msd_decode(code, received, sigma, genie_code_bits=None):
    """Multistage decoding: demap level i given decided levels ``< i``, then SC-decode it.

    ``received`` has shape (N,) or (batch, N).  With ``genie_code_bits`` the
    demapper conditions on those (true) lower-level code bits instead of the
    decisions.  Returns ``(info_bits, trace)``.
    """
    y = np.asarray(received, dtype=float)
    single = y.ndim == 1
    y = np.atleast_2d(y)
    if y.shape[1] != code.N:
        raise ValueError(f"expected {code.N} received values per word")
    if genie_code_bits is not None:
        genie_code_bits = np.asarray(genie_code_bits).reshape(y.shape[0], code.m, code.N)
    batch = y.shape[0]
    us = np.zeros((batch, code.m, code.N), dtype=np.uint8)
    cs = np.zeros((batch, code.m, code.N), dtype=np.uint8)
    prefix = np.zeros((batch, code.N), dtype=np.int64)
    for i, comp in enumerate(code.components):
        llr = analysis.level_llrs(y, i, prefix, code.constellation, code.labeling, sigma)
        us[:, i], cs[:, i] = sc_decode_full(comp, llr)
        known = cs[:, i] if genie_code_bits is None else genie_code_bits[:, i]
        prefix += known.astype(np.int64) << i
    info = us.reshape(batch, -1)[:, code.info_set]
    trace = MsdTrace(us, cs, map_symbols(cs, code.constellation, code.labeling))
    if single:
        return info[0], MsdTrace(us[0], cs[0], trace.symbols[0])
    return info, trace


def ml_variance(level_profile, per_level_polar_variances):
    """Variance of the mN bit-channel capacities from level and component statistics."""
    return compose_variance(level_profile, per_level_polar_variances)


# ---------------------------------------------------------------------------
# design artifact file
# ---------------------------------------------------------------------------

def _ints(arr):
    return ",".join(str(int(v)) for v in arr)


def design_to_text(code):
    """Text form: constellation size, labeling, N, K, information set, rates, predicted WER."""
    lines = [
        "# multilevel polar code design",
        f"m={code.m}",
        f"labeling={code.labeling.name}",
    ]
    if code.labeling.name.upper() not in ("SP", "GRAY"):
        lines.append(f"labeling_map={_ints(code.labeling.point_of_label)}")
    lines += [
        f"N={code.N}",
        f"K={code.K}",
        f"info_set={_ints(code.info_set)}",
        f"frozen_values={_ints(code.frozen_values)}",
        "level_rates=" + ",".join(repr(float(r)) for r in code.level_rates()),
    ]
    if code.sigma is not None:
        lines.append(f"sigma={code.sigma!r}")
    if code.predicted_wer is not None:
        lines.append(f"predicted_wer={code.predicted_wer!r}")
    return "\n".join(lines) + "\n"


def design_from_text(text):
    fields = dict(ln.split("=", 1) for ln in text.splitlines() if ln and not ln.startswith("#"))
    ints = lambda s: np.array([int(v) for v in s.split(",") if v], dtype=np.int64)
    m, N, K = int(fields["m"]), int(fields["N"]), int(fields["K"])
    if N <= 0 or N & (N - 1):
        raise ValueError("N must be a power of two")
    name = fields["labeling"]
    if "labeling_map" in fields:
        labeling = Labeling(m, ints(fields["labeling_map"]), name)
    else:
        labeling = labeling_by_name(name, m)
    opt = lambda key: float(fields[key]) if key in fields else None
    frozen = ints(fields["frozen_values"]) if "frozen_values" in fields else None
    code = MultilevelPolarCode(ask_constellation(m), labeling, N.bit_length() - 1,
                               ints(fields["info_set"]), frozen,
                               sigma=opt("sigma"), predicted_wer=opt("predicted_wer"))
    if code.K != K:
        raise ValueError("K does not match the information set")
    return code
