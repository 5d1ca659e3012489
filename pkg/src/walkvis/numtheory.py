"""Arithmetic substrate: sieves, the curve-generalized gcd, integer zeta
values, and truncated Euler products carrying rigorous tail bounds.

Everything here is a pure function of its inputs; the sieve tables are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np

#: Hard cap on sieve size (number of table entries), overridable per call.
MAX_TABLE_ENTRIES = 200_000_000


class CapacityError(Exception):
    """A requested table or computation exceeds the configured size cap."""


@dataclass(frozen=True)
class BExponent:
    """Coprime exponent pair (b1, b2) selecting the family of visibility curves.

    b1 acts on the y-displacement, b2 on the x-displacement.  (1, 1) is
    ordinary straight-line visibility.
    """

    b1: int
    b2: int

    def __post_init__(self) -> None:
        if self.b1 < 1 or self.b2 < 1:
            raise ValueError(f"exponents must be positive, got ({self.b1}, {self.b2})")
        if math.gcd(self.b1, self.b2) != 1:
            raise ValueError(f"exponents must be coprime, got ({self.b1}, {self.b2})")

    @property
    def lo(self) -> int:
        """min(b1, b2); floor exponent in the multi-walker density."""
        return min(self.b1, self.b2)

    @property
    def hi(self) -> int:
        """max(b1, b2)."""
        return max(self.b1, self.b2)

    def swapped(self) -> "BExponent":
        return BExponent(self.b2, self.b1)


def as_bexp(b) -> BExponent:
    """Coerce a BExponent or (b1, b2) pair, validating on the way."""
    if isinstance(b, BExponent):
        return b
    b1, b2 = b
    return BExponent(int(b1), int(b2))


@dataclass(frozen=True)
class PrimeTables:
    """Sieve tables up to ``limit``: primes, Mobius values, smallest prime factors.

    Invariants: mobius[1] = 1, mobius[p] = -1 for primes, mobius[n] = 0 exactly
    when n has a squared factor; spf[n] is the least prime dividing n (n >= 2);
    primes holds exactly the n with spf[n] = n.
    """

    limit: int
    primes: np.ndarray  # int64, ascending
    mobius: np.ndarray  # int8, indexed 0..limit
    spf: np.ndarray  # int32, indexed 0..limit


def sieve_primes(limit: int) -> np.ndarray:
    """Primes <= limit as an int64 array (plain Eratosthenes, no aux tables)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for i in range(2, math.isqrt(limit) + 1):
        if flags[i]:
            flags[i * i :: i] = False
    return np.nonzero(flags)[0].astype(np.int64)


def build_tables(limit: int, max_entries: int = MAX_TABLE_ENTRIES) -> PrimeTables:
    """Sieve primes, Mobius values and smallest prime factors up to ``limit``."""
    if limit < 2:
        raise CapacityError(f"sieve limit must be at least 2, got {limit}")
    if limit + 1 > max_entries:
        raise CapacityError(
            f"sieve of {limit + 1} entries exceeds the cap of {max_entries}"
        )
    spf = np.zeros(limit + 1, dtype=np.int32)
    for i in range(2, math.isqrt(limit) + 1):
        if spf[i] == 0:
            block = spf[i * i :: i]
            block[block == 0] = i
    untouched = np.nonzero(spf[2:] == 0)[0].astype(np.int64) + 2
    spf[untouched] = untouched  # primes > sqrt(limit), and the sieving primes
    spf[1] = 1

    primes = np.nonzero(spf[2:] == np.arange(2, limit + 1, dtype=np.int32))[0] + 2
    primes = primes.astype(np.int64)

    mobius = np.ones(limit + 1, dtype=np.int8)
    mobius[0] = 0
    for p in primes.tolist():
        mobius[p::p] *= -1
        sq = p * p
        if sq <= limit:
            mobius[sq::sq] = 0
    return PrimeTables(limit, primes, mobius, spf)


def factorize_distinct(x: int, tables: PrimeTables | None = None) -> Iterator[tuple[int, int]]:
    """Yield (prime, multiplicity) for x >= 1, via spf walk when in range."""
    if x < 1:
        raise ValueError(f"cannot factor {x}")
    if tables is not None and x <= tables.limit:
        spf = tables.spf
        while x > 1:
            p = int(spf[x])
            k = 0
            while x % p == 0:
                x //= p
                k += 1
            yield p, k
        return
    # trial division fallback; complete for any x
    for p in (2, 3):
        if x % p == 0:
            k = 0
            while x % p == 0:
                x //= p
                k += 1
            yield p, k
    d = 5
    while d * d <= x:
        for p in (d, d + 2):
            if x % p == 0:
                k = 0
                while x % p == 0:
                    x //= p
                    k += 1
                yield p, k
        d += 6
    if x > 1:
        yield x, 1


def _pow_divides(p: int, e: int, x: int) -> bool:
    """Whether p**e divides x (x > 0), rejecting early when p**e > x."""
    pe = p**e
    return pe <= x and x % pe == 0


def gcd_b(b, m: int, n: int, tables: PrimeTables | None = None) -> int:
    """Largest d >= 1 with d**b1 | m and d**b2 | n.

    Divisibility is taken on absolute values, and every d divides 0, so a
    single zero argument is fine; (0, 0) is rejected.  With b = (1, 1) this
    is the ordinary gcd.
    """
    bb = as_bexp(b)
    m, n = abs(m), abs(n)
    if m == 0 and n == 0:
        raise ValueError("gcd_b(0, 0) is undefined")
    if m == 0:
        return math.prod(p ** (k // bb.b2) for p, k in factorize_distinct(n, tables))
    if n == 0:
        return math.prod(p ** (k // bb.b1) for p, k in factorize_distinct(m, tables))
    # factor the smaller side; any contributing prime divides both
    if m <= n:
        small, e_small, other, e_other = m, bb.b1, n, bb.b2
    else:
        small, e_small, other, e_other = n, bb.b2, m, bb.b1
    g = 1
    for p, k in factorize_distinct(small, tables):
        e1 = k // e_small
        if e1 == 0:
            continue
        k2 = 0
        o = other
        while o % p == 0:
            o //= p
            k2 += 1
        e2 = k2 // e_other
        if e2 == 0:
            continue
        g *= p ** min(e1, e2)
    return g


@lru_cache(maxsize=None)
def zeta_int(k: int) -> float:
    """Riemann zeta at an integer k >= 2, absolute error below 1e-15.

    Direct summation to N = 10**6 plus an Euler-Maclaurin tail with two
    Bernoulli corrections; the first omitted term is O(k**5 * N**(-k-5)).
    """
    if k < 2:
        raise ValueError(f"zeta_int requires k >= 2, got {k}")
    N = 10**6
    ns = np.arange(1, N + 1, dtype=np.float64)
    terms = ns ** float(-k)
    head = math.fsum(terms[:4096].tolist())
    tail_sum = float(np.sum(terms[4096:][::-1]))  # ascending, for accuracy
    tail = (
        N ** (1 - k) / (k - 1)
        - N ** (-k) / 2
        + k * N ** (-k - 1) / 12
        - k * (k + 1) * (k + 2) * N ** (-k - 3) / 720
    )
    return head + tail_sum + tail


@dataclass(frozen=True)
class DensityResult:
    """A truncated Euler product together with a rigorous truncation bound.

    ``tail_bound`` dominates |value - infinite product|; ``prime_cutoff`` is
    the largest prime whose factor was multiplied in.
    """

    value: float
    prime_cutoff: int
    tail_bound: float


def euler_tail_cutoff(dev_constant: float, kappa: float, tol: float) -> float:
    """Smallest real P making the tail bound 2*C*P**(1-kappa)/(kappa-1) <= tol.

    Also enforces C*P**-kappa <= 1/2, the regime in which that bound is valid.
    """
    if kappa < 2:
        raise ValueError(f"decay exponent must be >= 2, got {kappa}")
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    if dev_constant < 0:
        raise ValueError(f"deviation constant must be >= 0, got {dev_constant}")
    if dev_constant == 0:
        return 2.0
    from_tol = (2.0 * dev_constant / (tol * (kappa - 1))) ** (1.0 / (kappa - 1))
    from_validity = (2.0 * dev_constant) ** (1.0 / kappa)
    return max(from_tol, from_validity, 2.0)


def euler_product_truncated(
    factor: Callable[[int], float],
    kappa: float,
    tol: float,
    *,
    dev_constant: float,
    tables: PrimeTables | None = None,
) -> DensityResult:
    """prod_p F(p) over primes p <= P, with P chosen so the discarded tail
    is rigorously below ``tol``.

    The caller guarantees 0 < F(p) <= 1 on the sieved range and
    |1 - F(p)| <= dev_constant * p**-kappa beyond the cutoff.  P is the
    smallest sieved prime at which 2*C*P**(1-kappa)/(kappa-1) <= tol (valid
    once C*P**-kappa <= 1/2); that bound is recorded in ``tail_bound``.
    An exact zero factor short-circuits to value 0 with tail_bound 0.
    """
    cutoff = euler_tail_cutoff(dev_constant, kappa, tol)
    primes = _primes_reaching(cutoff, tables)
    stop = int(np.searchsorted(primes, math.ceil(cutoff)))
    if stop == len(primes):
        raise CapacityError(f"prime tables end before the required cutoff {cutoff:.0f}")
    included = primes[: stop + 1]
    value = 1.0
    for p in included.tolist():
        f = factor(p)
        if f == 0.0:
            return DensityResult(0.0, p, 0.0)
        if f < 0.0 or f > 1.0 + 1e-12:
            raise ValueError(f"factor at p={p} is {f}, outside (0, 1]")
        value *= min(f, 1.0)  # float round-off may graze 1 from above
    prime_cutoff = int(included[-1])
    tail = 2.0 * dev_constant * float(prime_cutoff) ** (1.0 - kappa) / (kappa - 1.0)
    return DensityResult(value, prime_cutoff, tail)


def _primes_reaching(cutoff: float, tables: PrimeTables | None) -> np.ndarray:
    """A prime array guaranteed to contain a prime >= cutoff."""
    if tables is not None:
        if tables.limit >= cutoff and tables.limit >= 2 and float(tables.primes[-1]) >= cutoff:
            return tables.primes
        raise CapacityError(
            f"supplied tables reach {tables.limit}, below the required cutoff {cutoff:.0f}"
        )
    limit = max(8, int(cutoff * 1.3) + 64)
    while True:
        primes = sieve_primes(limit)
        if len(primes) and float(primes[-1]) >= cutoff:
            return primes
        limit *= 2
