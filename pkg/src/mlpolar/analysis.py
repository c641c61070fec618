"""Bit-channel analysis.

* exact polarization of the binary erasure channel,
* density evolution under the Gaussian approximation (GA): every bit channel
  is summarized by the mean ``m`` of a symmetric Gaussian LLR ``N(m, 2m)``,
* bit-level capacities of ASK labelings, by Monte Carlo and by quadrature,
* the coded-modulation capacity ``I(X; Y)``.
"""
import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special
from scipy.interpolate import CubicSpline

from .sbp import CapacityProfile, profile_variance

LN2 = math.log(2.0)


# ---------------------------------------------------------------------------
# binary erasure channel
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BecBitChannel:
    erasure: float

    @property
    def capacity(self):
        return 1.0 - self.erasure

    @property
    def error_prob(self):
        return self.erasure / 2.0


def bec_polarize(epsilon, n):
    """Erasure probabilities of the ``2^n`` bit channels of a length-``2^n`` polar code.

    Each step maps ``e`` to ``(2e - e^2, e^2)``; the minus channel takes the
    lower index, so the first step ends up in the most significant index bit.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("erasure probability must lie in [0, 1]")
    if not (isinstance(n, (int, np.integer)) and 0 <= n <= 20):
        raise ValueError("n must be an integer in [0, 20]")
    z = np.array([float(epsilon)])
    for _ in range(n):
        nxt = np.empty(2 * z.size)
        nxt[0::2] = z * (2.0 - z)
        nxt[1::2] = z * z
        z = nxt
    return z


def bec_profile(epsilon, n):
    """Capacity profile of :func:`bec_polarize`; a fair guess resolves erasures, so ``p_e = e/2``."""
    z = bec_polarize(epsilon, n)
    return CapacityProfile(1.0 - z, error_probs=z / 2.0)


def variance_curve_bec(epsilon_grid, n):
    """Rows ``(1 - epsilon, variance of the 2^n bit-channel capacities)``."""
    eps = np.asarray(epsilon_grid, dtype=float)
    if np.any(eps < 0) or np.any(eps > 1):
        raise ValueError("erasure probabilities must lie in [0, 1]")
    out = np.empty((eps.size, 2))
    for k, e in enumerate(eps):
        out[k] = 1.0 - e, profile_variance(1.0 - bec_polarize(e, n))
    return out


# ---------------------------------------------------------------------------
# Gaussian approximation
# ---------------------------------------------------------------------------

# Expectations E[g(L)], L ~ N(x, 2x), are tabulated in log-log coordinates by
# adaptive quadrature over X_LO <= x <= X_HI.  Below X_LO a Taylor expansion
# is used; above X_HI the Gaussian tail form c * exp(-x/4) / sqrt(x),
# continuity-matched at X_HI.
X_LO, X_HI = 1e-8, 2000.0
_TABLE_SIZE = 900
_S_MIN, _S_MAX = math.log(X_LO), math.log(1e15)


def _log_g_phi(u):
    # log(1 - tanh(u/2)) = log(2 sigmoid(-u))
    return LN2 + special.log_expit(-u)


def _log_g_phi_scalar(u):
    return LN2 - (u + math.log1p(math.exp(-u)) if u > 0 else math.log1p(math.exp(u)))


def _log_g_cap(u):
    # log(log2(1 + exp(-u)))
    sp = np.logaddexp(0.0, -u)
    with np.errstate(divide="ignore"):
        out = np.where(u > 30.0, -u, np.log(np.maximum(sp, 1e-300)))
    return out - math.log(LN2)


def _log_g_cap_scalar(u):
    if u > 30.0:
        return -u - math.log(LN2)
    sp = -u + math.log1p(math.exp(u)) if u < 0 else math.log1p(math.exp(-u))
    return math.log(sp) - math.log(LN2)


def _log_expectation(x, log_g, log_g_scalar):
    s = math.sqrt(2.0 * x)
    const = 0.5 * math.log(4.0 * math.pi * x)
    lo, hi = x - 40.0 * s, x + 40.0 * s
    grid = np.linspace(lo, hi, 20001)
    hv = log_g(grid) - (grid - x) ** 2 / (4.0 * x) - const
    k = int(np.argmax(hv))
    peak, hmax = grid[k], hv[k]
    points = sorted({peak, x} | ({0.0} if lo < 0 < hi else set()))

    def integrand(u):
        return math.exp(log_g_scalar(u) - (u - x) ** 2 / (4.0 * x) - const - hmax)

    val, _ = integrate.quad(integrand, lo, hi, points=points, limit=500,
                            epsabs=0.0, epsrel=1e-12)
    return math.log(val) + hmax


class _GaussTable:
    """Decreasing function ``x -> log E[g(L)]`` with its inverse."""

    def __init__(self, log_g, log_g_scalar, small_log, small_inv):
        s = np.linspace(math.log(X_LO), math.log(X_HI), _TABLE_SIZE)
        vals = np.array([_log_expectation(math.exp(v), log_g, log_g_scalar) for v in s])
        self._interp = CubicSpline(s, vals, extrapolate=False)
        self._small_log = small_log
        self._small_inv = small_inv
        self._top = vals[-1] - self._tail(np.array(X_HI))
        self.log_at_lo = vals[0]

    @staticmethod
    def _tail(x):
        return -x / 4.0 - 0.5 * np.log(x) + np.log1p(-10.0 / (7.0 * x))

    def log_value(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape)
        small = x < X_LO
        big = x > X_HI
        mid = ~(small | big)
        out[small] = self._small_log(x[small])
        out[mid] = self._interp(np.log(x[mid]))
        out[big] = self._tail(x[big]) + self._top
        return out

    def inverse(self, log_y):
        """Smallest x with ``log_value(x) <= log_y``, by bisection in log x."""
        t = np.asarray(log_y, dtype=float)
        out = np.empty(t.shape)
        small = t >= self.log_at_lo
        out[small] = np.maximum(self._small_inv(t[small]), 0.0)
        rest = ~small
        if np.any(rest):
            tr = t[rest]
            lo = np.full(tr.shape, _S_MIN)
            hi = np.full(tr.shape, _S_MAX)
            for _ in range(64):
                mid = 0.5 * (lo + hi)
                above = self.log_value(np.exp(mid)) > tr
                lo = np.where(above, mid, lo)
                hi = np.where(above, hi, mid)
            out[rest] = np.exp(0.5 * (lo + hi))
        return out


@functools.lru_cache(maxsize=None)
def _phi_table():
    # phi(x) = 1 - x/2 + x^2/4 + O(x^3)
    return _GaussTable(_log_g_phi, _log_g_phi_scalar,
                       small_log=lambda x: np.log1p(-x / 2.0 + x * x / 4.0),
                       small_inv=lambda t: -2.0 * t)


@functools.lru_cache(maxsize=None)
def _cap_table():
    # 1 - I(x) = 1 - x / (4 ln 2) + O(x^2)
    return _GaussTable(_log_g_cap, _log_g_cap_scalar,
                       small_log=lambda x: np.log1p(-x / (4.0 * LN2)),
                       small_inv=lambda t: -np.expm1(t) * 4.0 * LN2)


def _scalar(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def _means(m):
    if isinstance(m, GaussianBitChannel):
        m = m.llr_mean
    m = np.asarray(m, dtype=float)
    if np.any(m < 0) or np.any(np.isnan(m)):
        raise ValueError("LLR means must be non-negative")
    return m


def log_phi(x):
    """``log phi(x)`` where ``phi(x) = 1 - E[tanh(L/2)]``, ``L ~ N(x, 2x)``."""
    x = _means(x)
    return _scalar(_phi_table().log_value(x), x)


def phi(x):
    """Check-node degradation function: ``phi(0) = 1``, strictly decreasing to 0."""
    x = _means(x)
    return _scalar(np.exp(_phi_table().log_value(x)), x)


def phi_inverse(y):
    y = np.asarray(y, dtype=float)
    if np.any(y < 0) or np.any(y > 1):
        raise ValueError("phi takes values in [0, 1]")
    with np.errstate(divide="ignore"):
        out = _phi_table().inverse(np.log(y))
    out = np.where(y == 0, np.inf, out)
    return _scalar(out, y)


@dataclass(frozen=True)
class GaussianBitChannel:
    """Binary-input channel whose LLR is ``N(llr_mean, 2 llr_mean)``."""

    llr_mean: float

    def __post_init__(self):
        if not self.llr_mean >= 0:
            raise ValueError("LLR mean must be non-negative")

    @property
    def capacity(self):
        return ga_capacity(self.llr_mean)

    @property
    def error_prob(self):
        return pe_from_mean(self.llr_mean)


def ga_capacity(m):
    """``1 - E[log2(1 + exp(-L))]`` for ``L ~ N(m, 2m)``."""
    m = _means(m)
    return _scalar(-np.expm1(_cap_table().log_value(m)), m)


def ga_mean_from_capacity(capacity):
    """LLR mean whose Gaussian channel has the given capacity (inverse of :func:`ga_capacity`)."""
    c = np.asarray(capacity, dtype=float)
    if np.any(c < 0) or np.any(c >= 1):
        raise ValueError("capacity must lie in [0, 1)")
    out = _cap_table().inverse(np.log1p(-c))
    out = np.where(c == 0, 0.0, out)
    return _scalar(out, c)


def pe_from_mean(m):
    """Bit error probability ``Q(sqrt(m/2))`` of a hard decision on ``N(m, 2m)``."""
    m = _means(m)
    return _scalar(special.ndtr(-np.sqrt(m / 2.0)), m)


def ga_step(means):
    """One polarization step; returns interleaved ``(minus, plus)`` means."""
    means = np.asarray(means, dtype=float)
    table = _phi_table()
    lp = table.log_value(means)
    # 1 - (1 - phi)^2 = phi (2 - phi)
    minus = table.inverse(lp + np.log(2.0 - np.exp(lp)))
    minus = np.where(means == 0, 0.0, minus)
    out = np.empty(2 * means.size)
    out[0::2] = minus
    out[1::2] = 2.0 * means
    return out


def ga_polarize(m0, n):
    """LLR means of the ``2^n`` bit channels, in the same order as :func:`bec_polarize`."""
    m0 = float(_means(m0))
    if not (isinstance(n, (int, np.integer)) and 0 <= n <= 20):
        raise ValueError("n must be an integer in [0, 20]")
    means = np.array([m0])
    for _ in range(n):
        means = ga_step(means)
    return means


def ga_profile(m0, n):
    """Capacity profile with error probabilities and LLR means after ``n`` GA steps."""
    means = ga_polarize(m0, n)
    return CapacityProfile(ga_capacity(means), pe_from_mean(means), means)


# ---------------------------------------------------------------------------
# modulation bit levels
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=256)
def _candidates(constellation, labeling, level):
    """Points consistent with each prefix, split on bit ``level``.

    Returns an array of shape (2^level, 2, 2^(m-level-1)).
    """
    m = labeling.m
    prefix = np.arange(2 ** level)[:, None, None]
    bit = np.arange(2)[None, :, None]
    rest = np.arange(2 ** (m - level - 1))[None, None, :]
    labels = prefix + (bit << level) + (rest << (level + 1))
    return constellation.points[labeling.point_of_label[labels]]


def level_llrs(y, level, prefix, constellation, labeling, sigma):
    """LLRs of bit ``level`` given ``y`` and the integer value of the lower bits.

    ``prefix`` holds ``sum_{j < level} b_j 2^j`` per sample.
    """
    if constellation.m != labeling.m:
        raise ValueError("constellation and labeling orders differ")
    if not 0 <= level < labeling.m:
        raise ValueError("level out of range")
    y = np.asarray(y, dtype=float)
    cand = _candidates(constellation, labeling, level)[np.asarray(prefix, dtype=np.int64)]
    metric = -((y[..., None, None] - cand) ** 2) / (2.0 * sigma ** 2)
    lse = special.logsumexp(metric, axis=-1)
    return lse[..., 0] - lse[..., 1]


def llr_level(y, level, prev_bits, constellation, labeling, sigma):
    """LLR of bit ``level`` for a single observation given ``b_0 .. b_{level-1}``."""
    prev = np.asarray(prev_bits, dtype=np.int64).ravel()
    if prev.size != level:
        raise ValueError("need exactly `level` previous bits")
    prefix = int(prev @ (1 << np.arange(level))) if level else 0
    return float(level_llrs(y, level, prefix, constellation, labeling, sigma))


def mc_bit_level_profile(constellation, labeling, sigma, samples, rng, chunk=1 << 16):
    """Monte-Carlo bit-level capacities ``I(B_i; Y | B_0 .. B_{i-1})``.

    Every level conditions on the transmitted lower bits, and the estimate is
    the sample mean of ``1 - log2(1 + exp(-(1 - 2 b_i) L_i))``.  Estimates are
    clipped to [0, 1].
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    m = labeling.m
    sums = [[] for _ in range(m)]
    done = 0
    while done < samples:
        cnt = min(chunk, samples - done)
        labels = rng.integers(0, 2 ** m, size=cnt)
        x = constellation.points[labeling.point_of_label[labels]]
        y = x + sigma * rng.standard_normal(cnt)
        for i in range(m):
            L = level_llrs(y, i, labels & ((1 << i) - 1), constellation, labeling, sigma)
            b = (labels >> i) & 1
            sums[i].append(float(np.sum(np.logaddexp(0.0, -(1 - 2 * b) * L))))
        done += cnt
    info = np.array([1.0 - math.fsum(s) / (samples * LN2) for s in sums])
    return CapacityProfile(np.clip(info, 0.0, 1.0))


_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite.hermgauss(160)


def _subset_capacity(points, sigma):
    """``I(X; Y)`` for X uniform on ``points`` over AWGN, by Gauss-Hermite quadrature.

    ``points`` may carry leading batch axes; the last axis is the subset.
    """
    pts = np.asarray(points, dtype=float)
    size = pts.shape[-1]
    if size == 1:
        return np.zeros(pts.shape[:-1])
    noise = math.sqrt(2.0) * sigma * _GH_NODES
    # d[..., x, x'] = x - x'
    d = pts[..., :, None] - pts[..., None, :]
    z = d[..., None] + noise
    metric = -(z ** 2 - noise ** 2) / (2.0 * sigma ** 2)
    lse = special.logsumexp(metric, axis=-2)  # over x'
    expect = (lse @ _GH_WEIGHTS) / math.sqrt(math.pi)
    return math.log2(size) - np.mean(expect, axis=-1) / LN2


def cm_capacity(constellation, sigma):
    """Coded-modulation capacity of equiprobable signalling over AWGN (bits/symbol)."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return float(_subset_capacity(constellation.points, sigma))


def level_capacities(constellation, labeling, sigma):
    """Bit-level capacities by quadrature, using the chain rule over label cosets."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    m = labeling.m
    coset_means = np.zeros(m + 1)
    for i in range(m):
        labels = np.arange(2 ** i)[:, None] + (np.arange(2 ** (m - i)) << i)[None, :]
        pts = constellation.points[labeling.point_of_label[labels]]
        coset_means[i] = np.mean(_subset_capacity(pts, sigma))
    info = coset_means[:-1] - coset_means[1:]
    return CapacityProfile(np.clip(info, 0.0, 1.0))
