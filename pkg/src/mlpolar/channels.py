"""Channel models: real-valued ASK over AWGN and the binary erasure channel.

Symbol energy is fixed at one and the noise level is set through ``sigma``.
Eb/N0 follows the real-signalling convention ``Es = R * Eb`` and
``N0 = 2 * sigma**2``.
"""
from dataclasses import dataclass

import numpy as np

EBNO_CONVENTION = "Es=1, Es=R*Eb, N0=2*sigma^2 (real ASK, one dimension per symbol)"

#: Marker returned by :func:`bec_transmit` for an erased bit.
ERASURE = -1


def _check_m(m):
    if not (isinstance(m, (int, np.integer)) and 1 <= m <= 8):
        raise ValueError(f"bits per symbol must be an integer in [1, 8], got {m!r}")


@dataclass(frozen=True, eq=False)
class Constellation:
    """Ordered, unit-energy real signal points of a 2^m-ary ASK alphabet."""

    m: int
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.shape != (2 ** self.m,):
            raise ValueError("constellation must have 2^m points")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("constellation points must be strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def size(self):
        return 2 ** self.m

    def energy(self):
        return float(np.mean(self.points ** 2))

    def __eq__(self, other):
        return (isinstance(other, Constellation) and self.m == other.m
                and np.array_equal(self.points, other.points))

    def __hash__(self):
        return hash((self.m, self.points.tobytes()))


def ask_constellation(m):
    """Return the normalized 2^m-ASK grid ``(2p - (2^m - 1)) / sqrt((4^m - 1) / 3)``."""
    _check_m(m)
    M = 2 ** m
    p = np.arange(M)
    return Constellation(m, (2 * p - (M - 1)) / np.sqrt((4.0 ** m - 1) / 3))


@dataclass(frozen=True)
class AwgnChannel:
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    def transmit(self, x, rng):
        return awgn_transmit(x, self, rng)


@dataclass(frozen=True)
class BecChannel:
    epsilon: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("erasure probability must lie in [0, 1]")

    @property
    def capacity(self):
        return 1.0 - self.epsilon

    def transmit(self, bits, rng):
        return bec_transmit(bits, self, rng)


def ebno_to_sigma(ebno_db, rate):
    """Noise standard deviation for a given Eb/N0 (dB) and rate in bits per real symbol."""
    if not rate > 0:
        raise ValueError("rate must be positive")
    ebno = 10.0 ** (np.asarray(ebno_db, dtype=float) / 10.0)
    sigma = np.sqrt(1.0 / (2.0 * rate * ebno))
    return float(sigma) if np.ndim(sigma) == 0 else sigma


def sigma_to_ebno(sigma, rate):
    """Inverse of :func:`ebno_to_sigma`."""
    if not rate > 0:
        raise ValueError("rate must be positive")
    val = 10.0 * np.log10(1.0 / (2.0 * rate * np.asarray(sigma, dtype=float) ** 2))
    return float(val) if np.ndim(val) == 0 else val


def awgn_transmit(x, channel, rng):
    """Add white Gaussian noise of standard deviation ``channel.sigma`` to ``x``."""
    x = np.asarray(x, dtype=float)
    y = x + channel.sigma * rng.standard_normal(x.shape)
    return float(y) if y.ndim == 0 else y


def bec_transmit(bits, channel, rng):
    """Erase each bit independently with probability ``channel.epsilon``.

    Erased positions carry :data:`ERASURE`.
    """
    b = np.asarray(bits, dtype=np.int8)
    erased = rng.random(b.shape) < channel.epsilon
    out = np.where(erased, np.int8(ERASURE), b)
    return int(out) if out.ndim == 0 else out


def make_rng(seed, *stream):
    """Seeded generator; extra integers select an independent sub-stream."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, stream)]))
