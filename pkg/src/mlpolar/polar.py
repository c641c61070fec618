"""Binary polar codes with Arikan's kernel: encoding, SC decoding, construction.

Bit channels are indexed in the u-domain order of ``G_N = B_N F_N``.  The
decoder works on the bit-reversed channel word, which turns ``G_N`` into the
plain Kronecker power ``F_N`` and keeps decisions in natural index order.
"""
from dataclasses import dataclass, field

import numpy as np


def _check_n(n, upper=20):
    if not (isinstance(n, (int, np.integer)) and 0 <= n <= upper):
        raise ValueError(f"n must be an integer in [0, {upper}], got {n!r}")


def bit_reversal(n):
    """Permutation ``r`` with ``r[i]`` the n-bit reversal of ``i``."""
    _check_n(n)
    idx = np.arange(2 ** n)
    rev = np.zeros_like(idx)
    for b in range(n):
        rev |= ((idx >> b) & 1) << (n - 1 - b)
    return rev


def kernel_power(n):
    """``F_N``, the n-fold Kronecker power of ``[[1, 0], [1, 1]]``."""
    _check_n(n, 10)
    F = np.ones((1, 1), dtype=np.uint8)
    F2 = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    for _ in range(n):
        F = np.kron(F2, F)
    return F


def generator_matrix(n):
    """``G_N = B_N F_N`` as an explicit binary matrix (n <= 10)."""
    return kernel_power(n)[bit_reversal(n)]


def polar_transform(u):
    """Multiply by ``F_N`` over GF(2) along the last axis (butterfly, in O(N log N))."""
    x = np.array(u, dtype=np.uint8, copy=True)
    N = x.shape[-1]
    if N & (N - 1):
        raise ValueError("length must be a power of two")
    lead = x.shape[:-1]
    h = 1
    while h < N:
        # blocks of length 2h: first half ^= second half
        y = x.reshape(*lead, N // (2 * h), 2, h)
        y[..., 0, :] ^= y[..., 1, :]
        h *= 2
    return x


@dataclass(frozen=True, eq=False)
class PolarCode:
    """Length ``2^n`` polar code defined by its information set."""

    n: int
    info_set: np.ndarray
    frozen_values: np.ndarray = None
    frozen_mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        _check_n(self.n)
        N = 2 ** self.n
        info = np.asarray(self.info_set, dtype=np.int64).ravel()
        if np.unique(info).size != info.size:
            raise ValueError("information indices must be unique")
        if info.size and (info.min() < 0 or info.max() >= N):
            raise ValueError("information index out of range")
        info = np.sort(info)
        mask = np.ones(N, dtype=bool)
        mask[info] = False
        fv = self.frozen_values
        fv = np.zeros(N - info.size, np.uint8) if fv is None else np.asarray(fv, np.uint8).ravel()
        if fv.size != N - info.size or np.any(fv > 1):
            raise ValueError("need one frozen bit per frozen index")
        for arr in (info, mask, fv):
            arr.setflags(write=False)
        object.__setattr__(self, "info_set", info)
        object.__setattr__(self, "frozen_values", fv)
        object.__setattr__(self, "frozen_mask", mask)

    @property
    def N(self):
        return 2 ** self.n

    @property
    def K(self):
        return self.info_set.size

    @property
    def rate(self):
        return self.K / self.N

    @property
    def frozen_set(self):
        return np.flatnonzero(self.frozen_mask)

    def frozen_word(self):
        """Length-N vector holding the frozen values (zeros at info positions)."""
        u = np.zeros(self.N, dtype=np.uint8)
        u[self.frozen_mask] = self.frozen_values
        return u

    def encode(self, info_bits):
        return encode(self, info_bits)

    def decode(self, llrs):
        return sc_decode(self, llrs)

    def __eq__(self, other):
        return (isinstance(other, PolarCode) and self.n == other.n
                and np.array_equal(self.info_set, other.info_set)
                and np.array_equal(self.frozen_values, other.frozen_values))


def encode(code, info_bits):
    """Codeword ``u G_N`` with the info bits placed on ``code.info_set``.

    Accepts a batch of words along leading axes.
    """
    info_bits = np.asarray(info_bits, dtype=np.uint8)
    if info_bits.shape[-1:] != (code.K,):
        raise ValueError(f"expected {code.K} information bits, got shape {info_bits.shape}")
    u = np.broadcast_to(code.frozen_word(), info_bits.shape[:-1] + (code.N,)).copy()
    u[..., code.info_set] = info_bits
    return polar_transform(u[..., bit_reversal(code.n)])


def boxplus(a, b):
    """Exact check-node combination ``2 atanh(tanh(a/2) tanh(b/2))``.

    Written as ``sign(a) sign(b) min(|a|, |b|)`` plus two softplus corrections
    so that large and infinite LLRs behave.
    """
    with np.errstate(invalid="ignore"):
        s = np.abs(a + b)
        d = np.abs(a - b)
        corr = np.log1p(np.exp(-s)) - np.log1p(np.exp(-d))
        corr = np.where(np.isnan(corr), 0.0, corr)
        return np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b)) + corr


def _sc(llr, frozen, fvals):
    """SC on ``x = u F`` for LLRs of shape (batch, n); returns (u, x)."""
    n = llr.shape[1]
    if frozen.all():
        u = np.broadcast_to(fvals, llr.shape).astype(np.uint8)
        return u, polar_transform(u)
    if n == 1:
        u = np.where(frozen[0], fvals[0], llr < 0).astype(np.uint8)
        return u, u
    h = n // 2
    a, b = llr[:, :h], llr[:, h:]
    u1, x1 = _sc(boxplus(a, b), frozen[:h], fvals[:h])
    with np.errstate(invalid="ignore"):
        g = b + (1.0 - 2.0 * x1) * a
    # +inf - inf: the two halves contradict after a wrong earlier decision
    g = np.where(np.isnan(g), 0.0, g)
    u2, x2 = _sc(g, frozen[h:], fvals[h:])
    return np.concatenate([u1, u2], axis=1), np.concatenate([x1 ^ x2, x2], axis=1)


def sc_decode_full(code, llrs):
    """Successive-cancellation decisions for all N bit channels.

    ``llrs`` has shape (N,) or (batch, N); positive values favour bit 0.
    Returns ``(u_hat, codeword_hat)`` in the input's batch shape.
    """
    llrs = np.asarray(llrs, dtype=float)
    single = llrs.ndim == 1
    L = np.atleast_2d(llrs)
    if L.shape[1] != code.N:
        raise ValueError(f"expected {code.N} LLRs per word, got {L.shape[1]}")
    rev = bit_reversal(code.n)
    u, x = _sc(L[:, rev], code.frozen_mask, code.frozen_word())
    c = x[:, rev]
    return (u[0], c[0]) if single else (u, c)


def sc_decode(code, llrs):
    """Decode and return ``(info_bits, u_hat)``."""
    u, _ = sc_decode_full(code, llrs)
    return u[..., code.info_set], u


def select_frozen(profile, K, by="error"):
    """Polar code whose information set holds the K most reliable bit channels.

    ``by="error"`` ranks by the profile's error probabilities, ``by="capacity"``
    by capacities.  Ties freeze the smaller index.
    """
    if by == "error":
        if getattr(profile, "error_probs", None) is None:
            raise ValueError("profile carries no error probabilities")
        key = np.asarray(profile.error_probs, dtype=float)
    elif by == "capacity":
        key = -np.asarray(profile.values, dtype=float)
    else:
        raise ValueError("by must be 'error' or 'capacity'")
    N = key.size
    if N & (N - 1) or N == 0:
        raise ValueError("profile length must be a power of two")
    if not 0 <= K <= N:
        raise ValueError(f"K must lie in [0, {N}]")
    return PolarCode(int(np.log2(N)), best_indices(key, K))


def best_indices(key, K):
    """Indices of the K smallest keys; among equal keys the larger index wins."""
    key = np.asarray(key, dtype=float)
    # lexsort: primary key ascending, then index descending
    order = np.lexsort((-np.arange(key.size), key))
    return np.sort(order[:K])


def wer_sc(error_probs, info_set):
    """Word error rate of SC decoding, ``1 - prod_{i in A} (1 - p_e(i))``."""
    p = np.asarray(error_probs, dtype=float)[np.asarray(info_set, dtype=np.int64)]
    if p.size == 0:
        return 0.0
    return float(-np.expm1(np.sum(np.log1p(-p))))


def code_to_text(code):
    """Text description: N, K, sorted information set and frozen values."""
    fmt = lambda arr: ",".join(str(int(v)) for v in arr)
    return (f"N={code.N}\nK={code.K}\ninfo_set={fmt(code.info_set)}\n"
            f"frozen_values={fmt(code.frozen_values)}\n")


def code_from_text(text):
    fields = dict(line.split("=", 1) for line in text.splitlines() if line and not line.startswith("#"))
    ints = lambda s: np.array([int(v) for v in s.split(",") if v], dtype=np.int64)
    N, K = int(fields["N"]), int(fields["K"])
    if N <= 0 or N & (N - 1):
        raise ValueError("N must be a power of two")
    frozen = ints(fields["frozen_values"]) if "frozen_values" in fields else None
    code = PolarCode(N.bit_length() - 1, ints(fields["info_set"]), frozen)
    if code.K != K:
        raise ValueError("K does not match the information set")
    return code
