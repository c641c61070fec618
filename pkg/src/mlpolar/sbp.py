"""Sequential binary partitions: labelings, bit-channel statistics and products.

A k-SBP splits a 2^k-ary channel into k ordered binary-input bit channels.
Bit channel ``i`` sees the channel output plus the bits ``b_0 .. b_{i-1}``.
Labels are stored as integers ``g = sum_i b_i 2^i``, so ``b_0`` is the least
significant bit and is decoded first.
"""
import io
from dataclasses import dataclass, field

import numpy as np


def _check_m(m):
    if not (isinstance(m, (int, np.integer)) and 1 <= m <= 8):
        raise ValueError(f"labeling order must be an integer in [1, 8], got {m!r}")


@dataclass(frozen=True, eq=False)
class Labeling:
    """Bijection between binary m-tuples and point indices.

    ``point_of_label[g]`` is the point index carrying label ``g``.
    """

    m: int
    point_of_label: np.ndarray
    name: str = "custom"
    label_of_point: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pol = np.asarray(self.point_of_label, dtype=np.int64)
        M = 2 ** self.m
        if pol.shape != (M,) or not np.array_equal(np.sort(pol), np.arange(M)):
            raise ValueError("labeling must be a permutation of 0 .. 2^m - 1")
        lop = np.empty(M, dtype=np.int64)
        lop[pol] = np.arange(M)
        pol.setflags(write=False)
        lop.setflags(write=False)
        object.__setattr__(self, "point_of_label", pol)
        object.__setattr__(self, "label_of_point", lop)

    def point(self, bits):
        """Point index of the label ``[b_0, ..., b_{m-1}]`` (last axis)."""
        return self.point_of_label[bits_to_int(bits)]

    def bits(self, point):
        """Label bits ``[b_0, ..., b_{m-1}]`` of the given point index."""
        return int_to_bits(self.label_of_point[np.asarray(point)], self.m)

    def __eq__(self, other):
        return (isinstance(other, Labeling) and self.m == other.m
                and np.array_equal(self.point_of_label, other.point_of_label))

    def __hash__(self):
        return hash((self.m, self.point_of_label.tobytes()))


def bits_to_int(bits):
    bits = np.asarray(bits, dtype=np.int64)
    weights = 1 << np.arange(bits.shape[-1], dtype=np.int64)
    return bits @ weights


def int_to_bits(values, width):
    values = np.asarray(values, dtype=np.int64)
    return ((values[..., None] >> np.arange(width)) & 1).astype(np.int8)


def sp_labeling(m):
    """Set-partitioning labeling for ASK: natural binary, ``p = sum_i b_i 2^i``.

    Fixing the low bits leaves a sub-grid whose spacing doubles at each level,
    which is Ungerboeck's partition of the one-dimensional grid.
    """
    _check_m(m)
    return Labeling(m, np.arange(2 ** m), "SP")


def gray_labeling(m):
    """Binary-reflected Gray labeling: point ``p`` carries label ``p ^ (p >> 1)``."""
    _check_m(m)
    p = np.arange(2 ** m)
    gray = p ^ (p >> 1)
    pol = np.empty_like(p)
    pol[gray] = p
    return Labeling(m, pol, "GRAY")


def labeling_by_name(name, m):
    key = name.upper()
    if key == "SP":
        return sp_labeling(m)
    if key in ("GRAY", "G"):
        return gray_labeling(m)
    raise ValueError(f"unknown labeling {name!r}")


@dataclass(frozen=True, eq=False)
class CapacityProfile:
    """Per-bit-channel capacities in decode order, with optional companions."""

    values: np.ndarray
    error_probs: np.ndarray = None
    llr_means: np.ndarray = None

    def __post_init__(self):
        vals = np.atleast_1d(np.asarray(self.values, dtype=float))
        if vals.ndim != 1:
            raise ValueError("profile values must be one-dimensional")
        if np.any(vals < 0) or np.any(vals > 1):
            raise ValueError("capacities must lie in [0, 1]")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        for name in ("error_probs", "llr_means"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.atleast_1d(np.asarray(arr, dtype=float))
            if arr.shape != vals.shape:
                raise ValueError(f"{name} must have the same length as values")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.error_probs is not None and (
                np.any(self.error_probs < 0) or np.any(self.error_probs > 0.5)):
            raise ValueError("error probabilities must lie in [0, 0.5]")
        if self.llr_means is not None and np.any(self.llr_means < 0):
            raise ValueError("LLR means must be non-negative")

    def __len__(self):
        return len(self.values)

    def mean(self):
        return profile_mean(self)

    def variance(self):
        return profile_variance(self)

    def to_csv(self):
        return profile_to_csv(self)


def _values(profile):
    vals = profile.values if isinstance(profile, CapacityProfile) else np.asarray(profile, float)
    if vals.size == 0:
        raise ValueError("profile is empty")
    return vals


def profile_mean(profile):
    """Average bit-channel capacity."""
    return float(np.mean(_values(profile)))


def profile_variance(profile):
    """Population variance of the bit-channel capacities.

    Never exceeds ``M (1 - M)`` for capacities in [0, 1].
    """
    vals = _values(profile)
    mean = np.mean(vals)
    return float(np.mean((vals - mean) ** 2))


def product_bit_index(i, j, k1, k2):
    """Index of bit channel ``j`` of the inner SBP applied to outer bit channel ``i``."""
    if not (0 <= i < k1 and 0 <= j < k2):
        raise ValueError("bit-channel index out of range")
    return k2 * i + j


def product_position(i, j, k1, k2):
    """Position that ``P_{k1,k2}`` moves component ``k2 i + j`` to."""
    if not (0 <= i < k1 and 0 <= j < k2):
        raise ValueError("bit-channel index out of range")
    return i + k1 * j


def product_permutation(k1, k2):
    """Index array ``perm`` with ``perm[k2 i + j] = i + k1 j``."""
    i, j = np.divmod(np.arange(k1 * k2), k2)
    return i + k1 * j


def permutation_matrix(k1, k2):
    """Binary matrix ``P_{k1,k2}`` acting on row vectors: ``(b P)[i + k1 j] = b[k2 i + j]``."""
    perm = product_permutation(k1, k2)
    P = np.zeros((k1 * k2, k1 * k2), dtype=np.uint8)
    P[np.arange(k1 * k2), perm] = 1
    return P


def compose_variance(outer_profile, inner_variances):
    """Variance of a product SBP from the outer profile and the inner variances."""
    outer = _values(outer_profile)
    inner = np.asarray(inner_variances, dtype=float)
    if inner.shape != outer.shape:
        raise ValueError("need one inner variance per outer bit channel")
    return profile_variance(outer) + float(np.mean(inner))


def compose_profiles(outer_profile, inner_profiles):
    """Concatenate inner profiles in product order (outer index major)."""
    outer = _values(outer_profile)
    if len(inner_profiles) != len(outer):
        raise ValueError("need one inner profile per outer bit channel")
    return CapacityProfile(np.concatenate([_values(p) for p in inner_profiles]))


def gf2_rank(matrix):
    A = np.array(matrix, dtype=np.uint8) & 1
    rows, cols = A.shape
    rank = 0
    for c in range(cols):
        pivot = np.nonzero(A[rank:, c])[0]
        if pivot.size == 0:
            continue
        r = rank + pivot[0]
        A[[rank, r]] = A[[r, rank]]
        mask = A[:, c].astype(bool)
        mask[rank] = False
        A[mask] ^= A[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def gf2_det(matrix):
    """Determinant over the binary field (1 iff invertible)."""
    A = np.asarray(matrix)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    return int(gf2_rank(A) == A.shape[0])


@dataclass(frozen=True, eq=False)
class LinearSbp:
    """Linear k-SBP with labeling ``b -> b A`` over the binary field."""

    matrix: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.matrix, dtype=np.uint8) & 1
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("labeling matrix must be square")
        if not gf2_det(A):
            raise ValueError("labeling matrix is singular over GF(2)")
        A.setflags(write=False)
        object.__setattr__(self, "matrix", A)

    @property
    def k(self):
        return self.matrix.shape[0]

    def label(self, bits):
        return (np.asarray(bits, dtype=np.int64) @ self.matrix) % 2

    def __mul__(self, inner):
        """Product SBP ``self (x) inner``."""
        return LinearSbp(linear_product_matrix(self.matrix, inner.matrix))


def linear_product_matrix(a_outer, a_inner):
    """Labeling matrix ``P_{k1,k2} (A_inner kron A_outer)`` of a product of linear SBPs."""
    a_outer = np.asarray(a_outer, dtype=np.int64) & 1
    a_inner = np.asarray(a_inner, dtype=np.int64) & 1
    for A in (a_outer, a_inner):
        if A.ndim != 2 or A.shape[0] != A.shape[1] or not gf2_det(A):
            raise ValueError("both labeling matrices must be square and invertible over GF(2)")
    k1, k2 = a_outer.shape[0], a_inner.shape[0]
    P = permutation_matrix(k1, k2).astype(np.int64)
    return ((P @ np.kron(a_inner, a_outer)) % 2).astype(np.uint8)


def profile_to_csv(profile):
    """CSV rows ``index,capacity[,p_e][,llr_mean]`` with a header line."""
    cols = ["index", "capacity"]
    data = [np.arange(len(profile)), profile.values]
    if profile.error_probs is not None:
        cols.append("p_e")
        data.append(profile.error_probs)
    if profile.llr_means is not None:
        cols.append("llr_mean")
        data.append(profile.llr_means)
    out = io.StringIO()
    out.write(",".join(cols) + "\n")
    for row in zip(*data):
        out.write(str(int(row[0])) + "," + ",".join(repr(float(v)) for v in row[1:]) + "\n")
    return out.getvalue()


def profile_from_csv(text):
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]]).reshape(-1, len(header))
    if not np.array_equal(rows[:, 0], np.arange(len(rows))):
        raise ValueError("profile rows must be indexed 0 .. k-1 in order")
    cols = dict(zip(header, rows.T))
    return CapacityProfile(cols["capacity"], cols.get("p_e"), cols.get("llr_mean"))


def labeling_to_csv(labeling):
    """CSV rows ``label,point`` preceded by a ``# name=..., m=...`` line."""
    lines = [f"# name={labeling.name}, m={labeling.m}", "label,point"]
    lines += [f"{g},{p}" for g, p in enumerate(labeling.point_of_label)]
    return "\n".join(lines) + "\n"


def labeling_from_csv(text):
    lines = text.splitlines()
    meta = dict(kv.strip().split("=") for kv in lines[0].lstrip("# ").split(","))
    table = [ln.split(",") for ln in lines[2:] if ln]
    pol = np.array([int(p) for _, p in table])
    return Labeling(int(meta["m"]), pol, meta["name"])
