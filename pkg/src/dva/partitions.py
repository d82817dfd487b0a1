"""Partition combinatorics, q-analogues, and counting series.

All results are exact: integer statistics, q-analogues built as integer
coefficient lists and evaluated at whatever coefficient the caller supplies
(symbolic, rational, or root of unity), and generating-function coefficients
from direct products or counting recurrences.
"""

from fractions import Fraction
import functools

from .exactfield import RatFunc, Series


class Partition:
    """Weakly decreasing tuple of positive integer parts; () is the empty one."""

    __slots__ = ("parts",)

    def __init__(self, parts=()):
        parts = tuple(int(x) for x in parts)
        for x in parts:
            if x <= 0:
                raise ValueError("parts must be positive")
        for i in range(len(parts) - 1):
            if parts[i] < parts[i + 1]:
                raise ValueError("parts must be weakly decreasing")
        self.parts = parts

    def weight(self):
        return sum(self.parts)

    def length(self):
        return len(self.parts)

    def mult(self, i):
        """Number of parts equal to i."""
        return sum(1 for x in self.parts if x == i)

    def mults(self):
        """Map part value -> multiplicity, only nonzero entries."""
        out = {}
        for x in self.parts:
            out[x] = out.get(x, 0) + 1
        return out

    def slot_vector(self, N):
        """Multiplicity vector (m_0, m_1, ..., m_maxpart) over N slots total.

        m_0 counts the unused slots, N - length; requires length <= N.
        """
        if len(self.parts) > N:
            raise ValueError("partition longer than slot count")
        top = self.parts[0] if self.parts else 0
        return (N - len(self.parts),) + tuple(self.mult(i) for i in range(1, top + 1))

    def increasing(self):
        """Parts rearranged weakly increasing."""
        return tuple(reversed(self.parts))

    def to_str(self):
        return ",".join(str(x) for x in self.parts) if self.parts else "-"

    @staticmethod
    def from_str(s):
        s = s.strip()
        if s in ("-", ""):
            return Partition()
        return Partition(int(x) for x in s.split(","))

    def __eq__(self, other):
        return isinstance(other, Partition) and self.parts == other.parts

    def __hash__(self):
        return hash(("Partition", self.parts))

    def __iter__(self):
        return iter(self.parts)

    def __len__(self):
        return len(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def __repr__(self):
        return f"Partition({list(self.parts)})"


class IntSequence:
    """Finite list of integers with no ordering or positivity requirement.

    Index sequences for generalized symmetric-function families may repeat,
    vanish, run out of order, or go negative; this wrapper just carries them.
    """

    __slots__ = ("entries",)

    def __init__(self, entries=()):
        self.entries = tuple(int(x) for x in entries)

    def weight(self):
        return sum(self.entries)

    def is_partition(self):
        return (all(x > 0 for x in self.entries)
                and all(self.entries[i] >= self.entries[i + 1]
                        for i in range(len(self.entries) - 1)))

    def as_partition(self):
        if not self.is_partition():
            raise ValueError("sequence is not a partition")
        return Partition(self.entries)

    def __eq__(self, other):
        return isinstance(other, IntSequence) and self.entries == other.entries

    def __hash__(self):
        return hash(("IntSequence", self.entries))

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __repr__(self):
        return f"IntSequence({list(self.entries)})"


def revlex_key(lam):
    """Sort key putting (n) first and (1^n) last among equal weights."""
    return tuple(-x for x in lam.parts)


def partitions_of(n, max_multiplicity=None, exclude_parts_divisible_by=None,
                  max_length=None):
    """All partitions of n under the given constraints, reverse-lex order."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    out = []

    def rec(remaining, maxpart, prefix):
        if remaining == 0:
            out.append(Partition(prefix))
            return
        if maxpart == 0:
            return
        for k in range(min(remaining, maxpart), 0, -1):
            if exclude_parts_divisible_by and k % exclude_parts_divisible_by == 0:
                continue
            jmax = remaining // k
            if max_multiplicity is not None:
                jmax = min(jmax, max_multiplicity)
            if max_length is not None:
                jmax = min(jmax, max_length - len(prefix))
            for j in range(jmax, 0, -1):
                rec(remaining - j * k, k - 1, prefix + (k,) * j)

    rec(n, n, ())
    return out


def dominates(lam, mu):
    """Partial-sum dominance for partitions of equal weight."""
    if lam.weight() != mu.weight():
        raise ValueError("dominance needs equal weights")
    acc_l = acc_m = 0
    for i in range(max(len(lam), len(mu))):
        acc_l += lam.parts[i] if i < len(lam) else 0
        acc_m += mu.parts[i] if i < len(mu) else 0
        if acc_l < acc_m:
            return False
    return True


def stat(kind, lam, q=None):
    """Partition statistic: z, n_stat, ht_op, or the polynomial b_poly."""
    if kind == "z":
        out = 1
        for i, m in lam.mults().items():
            out *= i ** m * _factorial(m)
        return out
    if kind == "n_stat":
        return sum(i * x for i, x in enumerate(lam.parts))
    if kind == "ht_op":
        ell = lam.length()
        return stat("n_stat", lam) - ell * (ell - 1) // 2
    if kind == "b_poly":
        if q is None:
            raise ValueError("b_poly needs q")
        out = 1
        for m in lam.mults().values():
            out = out * q_pochhammer(q, q, m)
        return out
    raise ValueError(f"unknown statistic {kind!r}")


@functools.lru_cache(maxsize=None)
def _factorial(m):
    out = 1
    for i in range(2, m + 1):
        out *= i
    return out


def q_pochhammer(x, q, M):
    """Product (1 - x)(1 - x q)...(1 - x q^(M-1)); empty product for M=0."""
    if M < 0:
        raise ValueError("M must be nonnegative")
    out = 1
    pw = 1
    for _ in range(M):
        out = out * (1 - x * pw)
        pw = pw * q
    return out


@functools.lru_cache(maxsize=None)
def _gauss_binomial(n, k):
    """Gaussian binomial coefficient as a tuple of integer coefficients."""
    if k < 0 or k > n:
        return (0,)
    if k == 0 or k == n:
        return (1,)
    # Pascal: [n,k] = [n-1,k-1] + q^k [n-1,k]
    a = _gauss_binomial(n - 1, k - 1)
    b = _gauss_binomial(n - 1, k)
    out = [0] * max(len(a), k + len(b))
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[k + i] += c
    return tuple(out)


def q_multinomial(N, mults, q):
    """Gaussian multinomial over the given multiplicity slots, evaluated at q.

    Built as a product of Gaussian binomials over partial sums, so the result
    is a genuine polynomial in q and stays meaningful at roots of unity.
    """
    mults = tuple(int(m) for m in mults)
    if any(m < 0 for m in mults):
        raise ValueError("multiplicities must be nonnegative")
    if sum(mults) != N:
        raise ValueError("multiplicities must sum to N")
    coeffs = (1,)
    acc = 0
    for m in mults:
        acc += m
        coeffs = _poly_mul_int(coeffs, _gauss_binomial(acc, m))
    # Horner from the top coefficient down
    out = 0
    for c in reversed(coeffs):
        out = out * q + c
    return out


def _poly_mul_int(a, b, L=None):
    n = len(a) + len(b) - 1 if L is None else min(L + 1, len(a) + len(b) - 1)
    out = [0] * n
    for i, ca in enumerate(a):
        if ca == 0 or i >= n:
            continue
        for j, cb in enumerate(b):
            if i + j >= n:
                break
            out[i + j] += ca * cb
    return tuple(out)


def _count_series(L, part_ok):
    """Coefficients of Prod 1/(1 - x^n) over allowed part sizes n."""
    ways = [0] * (L + 1)
    ways[0] = 1
    for part in range(1, L + 1):
        if not part_ok(part):
            continue
        for total in range(part, L + 1):
            ways[total] += ways[total - part]
    return ways


def _product_series(L, factors):
    """Multiply out integer coefficient lists, truncated at order L."""
    out = (1,)
    for f in factors:
        out = _poly_mul_int(out, f, L)
    return list(out) + [0] * (L + 1 - len(out))


def _level_factor(n, copies, L):
    """Coefficient list of 1 + x^n + ... + x^(n*copies), truncated at L."""
    f = [0] * (min(n * copies, L) + 1)
    for j in range(copies + 1):
        if n * j > L:
            break
        f[n * j] = 1
    return tuple(f)


def char_series(kind, L, **params):
    """Counting series for module characters and determinant exponents.

    Kinds: verma (all partitions), reduced_N (no part divisible by N),
    q2_r (distinct parts, part r forbidden), qN_rs (capped multiplicities
    with a deeper cap at part r), fermionic_N (multiplicities below N),
    witten_q_minus1 (signed count, linear in h), M_doubleprime (distinct
    parts avoiding two residue classes mod M).
    """
    if L < 0:
        raise ValueError("order must be nonnegative")
    if kind == "verma":
        return Series("x", L, _count_series(L, lambda n: True))
    if kind == "reduced_N":
        N = _req_pos(params, "N")
        return Series("x", L, _count_series(L, lambda n: n % N != 0))
    if kind == "q2_r":
        r = _req_pos(params, "r")
        factors = [_level_factor(n, 1, L) for n in range(1, L + 1) if n != r]
        return Series("x", L, _product_series(L, factors))
    if kind == "qN_rs":
        N = _req_pos(params, "N")
        r = _req_pos(params, "r")
        s = _req_pos(params, "s")
        if s > N - 1:
            raise ValueError("s must lie in 1..N-1")
        factors = [_level_factor(r, N - 1 - s, L)]
        factors += [_level_factor(m, N - 1, L) for m in range(1, L + 1) if m != r]
        return Series("x", L, _product_series(L, factors))
    if kind == "fermionic_N":
        N = _req_pos(params, "N")
        factors = [_level_factor(n, N - 1, L) for n in range(1, L + 1)]
        return Series("x", L, _product_series(L, factors))
    if kind == "witten_q_minus1":
        euler = _product_series(
            L, [(1,) + (0,) * (n - 1) + (-1,) for n in range(1, L + 1)])
        hvar = RatFunc.var("h")
        return Series("x", L, [hvar * c for c in euler])
    if kind == "M_doubleprime":
        M = _req_pos(params, "M")
        m0 = params.get("m0")
        if m0 is None:
            raise ValueError("missing parameter m0")
        banned = {m0 % M, (-m0) % M}
        factors = [_level_factor(n, 1, L)
                   for n in range(1, L + 1) if n % M not in banned]
        return Series("x", L, _product_series(L, factors))
    raise ValueError(f"unknown series kind {kind!r}")


def _req_pos(params, name):
    v = params.get(name)
    if v is None or int(v) <= 0:
        raise ValueError(f"missing or invalid parameter {name}")
    return int(v)
