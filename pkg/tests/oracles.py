"""Brute-force reference computations used by the tests.

These deliberately avoid the package's fast paths: explicit matrices,
enumeration over erasure patterns and codewords, and adaptive quadrature.
"""
import itertools
import math

import numpy as np
from scipy import integrate


def gf2_rank(rows):
    rows = [int("".join(map(str, r)), 2) for r in np.asarray(rows, dtype=int)]
    rank = 0
    while rows:
        pivot = max(rows)
        if pivot == 0:
            break
        rows.remove(pivot)
        top = pivot.bit_length() - 1
        rows = [r ^ pivot if (r >> top) & 1 else r for r in rows]
        rank += 1
    return rank


def explicit_generator(n):
    """B_N (F_2 kron ... kron F_2) built with explicit loops."""
    N = 2 ** n
    F = np.array([[1]])
    for _ in range(n):
        big = np.zeros((2 * F.shape[0], 2 * F.shape[0]), dtype=int)
        h = F.shape[0]
        big[:h, :h] = F
        big[h:, :h] = F
        big[h:, h:] = F
        F = big
    rev = [int(format(i, f"0{n}b")[::-1], 2) if n else 0 for i in range(N)]
    return F[rev]


def bec_capacities_by_enumeration(epsilon, n):
    """Bit-channel capacities of the length-2^n polar code over a BEC.

    u_i is recoverable from the unerased code bits and u_0..u_{i-1} iff
    rank(G[i:, T]) exceeds rank(G[i+1:, T]), T the unerased positions.
    """
    G = explicit_generator(n)
    N = 2 ** n
    caps = np.zeros(N)
    for pattern in itertools.product((0, 1), repeat=N):
        erased = np.array(pattern, dtype=bool)
        prob = epsilon ** erased.sum() * (1 - epsilon) ** (N - erased.sum())
        cols = G[:, ~erased]
        for i in range(N):
            if cols.shape[1] == 0:
                continue
            if gf2_rank(cols[i:]) - gf2_rank(cols[i + 1:]) == 1:
                caps[i] += prob
    return caps


def sc_by_marginalization(llrs, frozen_mask, frozen_values=None):
    """SC decisions by exhaustive marginalization over future u bits."""
    llrs = np.asarray(llrs, dtype=float)
    N = llrs.size
    n = N.bit_length() - 1
    G = explicit_generator(n)
    fv = np.zeros(N, dtype=int) if frozen_values is None else np.asarray(frozen_values)
    # log P(y_t | c_t): up to a constant, -c_t * llr_t
    u_hat = np.zeros(N, dtype=int)
    for i in range(N):
        if frozen_mask[i]:
            u_hat[i] = fv[i]
            continue
        score = [-np.inf, -np.inf]
        for tail in itertools.product((0, 1), repeat=N - i - 1):
            for b in (0, 1):
                u = np.concatenate([u_hat[:i], [b], tail]).astype(int)
                c = u @ G % 2
                score[b] = np.logaddexp(score[b], -np.dot(c, llrs))
        u_hat[i] = 0 if score[0] >= score[1] else 1
    return u_hat


def biawgn_capacity(sigma):
    """Capacity of BPSK over AWGN by adaptive quadrature over y."""
    def integrand(y):
        p = math.exp(-(y - 1) ** 2 / (2 * sigma ** 2)) / math.sqrt(2 * math.pi * sigma ** 2)
        return p * np.logaddexp(0.0, -2 * y / sigma ** 2) / math.log(2)
    val, _ = integrate.quad(integrand, 1 - 40 * sigma, 1 + 40 * sigma, limit=400, epsabs=1e-13)
    return 1 - val


def gaussian_llr_expectation(x, g):
    """E[g(L)] for L ~ N(x, 2x) by adaptive quadrature."""
    s = math.sqrt(2 * x)
    f = lambda u: g(u) * math.exp(-(u - x) ** 2 / (4 * x)) / math.sqrt(4 * math.pi * x)
    val, _ = integrate.quad(f, x - 40 * s, x + 40 * s, points=[0.0, x], limit=400, epsabs=1e-14)
    return val


def ask_mutual_information(points, sigma):
    """I(X;Y) for equiprobable real points over AWGN, by adaptive quadrature."""
    points = np.asarray(points, dtype=float)
    M = points.size

    def density(y):
        return np.mean(np.exp(-(y - points) ** 2 / (2 * sigma ** 2))) / math.sqrt(2 * math.pi * sigma ** 2)

    total = 0.0
    for x in points:
        def integrand(y):
            p = math.exp(-(y - x) ** 2 / (2 * sigma ** 2)) / math.sqrt(2 * math.pi * sigma ** 2)
            q = density(y)
            return p * math.log2(p / q) if p > 0 and q > 0 else 0.0
        breaks = sorted(set(np.clip(points, x - 12 * sigma, x + 12 * sigma)))
        val, _ = integrate.quad(integrand, x - 12 * sigma, x + 12 * sigma, points=breaks,
                                limit=400, epsabs=1e-12)
        total += val
    return total / M
