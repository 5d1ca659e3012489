"""Closed-form limiting densities, the arithmetic functions behind them,
and numerical verifiers for the summation identities behind them.

The two density evaluators share the rigorous tail-bound machinery from
``numtheory``.  Both extract integer zeta factors so the corrected per-prime
factors decay much faster than the raw ones, keeping prime cutoffs small
even at tight tolerances:

* watchpoints, J observers:  prod_p (1 - J/p^k),  k = b1 + b2.  Corrected
  factor (1 - J*t)/(1 - t)^J with t = p^-k deviates from 1 by at most
  2*J^2*p^-2k once J*t <= 1/2, so kappa doubles to 2k.
* walkers, r of them:  prod_p (1 - p^-lo + p^-lo*(1 - p^-hi)^r).  After
  extracting zeta(k)^-r the deviation is below 3*r^2*p^-(lo+2hi); the
  corrected factors overflow float range for large r, so this product is
  accumulated in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .numtheory import (
    BExponent,
    DensityResult,
    PrimeTables,
    as_bexp,
    euler_product_truncated,
    euler_tail_cutoff,
    factorize_distinct,
    gcd_b,
    sieve_primes,
    zeta_int,
    _primes_reaching,
)

ShiftVector = tuple[int, ...]


def density_watchpoints(b, J: int, tol: float = 1e-9, tables: PrimeTables | None = None) -> DensityResult:
    """Limiting proportion of steps visible from J pairwise-visible watchpoints.

    Exactly zero when J = 2**(b1+b2) (the factor at p = 2 vanishes: no point
    is visible from a saturated set).
    """
    bb = as_bexp(b)
    k = bb.b1 + bb.b2
    if not 1 <= J <= 2**k:
        raise ValueError(f"J must lie in 1..2**(b1+b2) = {2**k}, got {J}")

    def corrected(p: int) -> float:
        t = 1.0 / p**k
        return (1.0 - J * t) / (1.0 - t) ** J

    raw = euler_product_truncated(corrected, 2 * k, tol, dev_constant=2.0 * J * J, tables=tables)
    if raw.value == 0.0:
        return raw
    return DensityResult(raw.value * zeta_int(k) ** (-J), raw.prime_cutoff, raw.tail_bound)


def density_walkers(b, r: int, tol: float = 1e-9, tables: PrimeTables | None = None) -> DensityResult:
    """Limiting proportion of steps at which r independent walkers are all
    visible from the origin.

    Depends on b only through lo = min(b1, b2) and hi = max(b1, b2); strictly
    decreasing in r with limit 1/zeta(lo) when lo >= 2.
    """
    bb = as_bexp(b)
    if r < 1:
        raise ValueError(f"walker count must be >= 1, got {r}")
    lo, hi = bb.lo, bb.hi
    k = lo + hi
    kappa = lo + 2 * hi
    dev_c = 3.0 * r * r
    cutoff = euler_tail_cutoff(dev_c, kappa, tol)
    primes = _primes_reaching(cutoff, tables)
    stop = int(np.searchsorted(primes, math.ceil(cutoff)))
    included = primes[: stop + 1]
    log_acc = -r * math.log(zeta_int(k))
    for p in included.tolist():
        y = 1.0 / p**lo
        z = 1.0 / p**hi
        f = 1.0 - y * (1.0 - (1.0 - z) ** r)
        log_acc += math.log(f) - r * math.log1p(-1.0 / p**k)
    prime_cutoff = int(included[-1])
    tail = 2.0 * dev_c * float(prime_cutoff) ** (1.0 - kappa) / (kappa - 1.0)
    return DensityResult(math.exp(log_acc), prime_cutoff, tail)


def f_b_value(b, n: int, tables: PrimeTables | None = None) -> float:
    """Multiplicative visibility density factor of n.

    On a prime power p^k the value is 1 for k < b1 and 1 - p^-b2 for k >= b1,
    so f(n) = prod over primes with p^b1 | n of (1 - p^-b2); always in (0, 1].
    """
    bb = as_bexp(b)
    if n < 1:
        raise ValueError(f"f_b is defined on positive integers, got {n}")
    out = 1.0
    for p, k in factorize_distinct(n, tables):
        if k >= bb.b1:
            out *= 1.0 - 1.0 / p**bb.b2
    return out


def f_b_values_upto(b, x: int, primes: np.ndarray | None = None) -> np.ndarray:
    """f_b(n) for all n <= x at once (index 0 is unused and set to 0).

    Sieve-style: each prime scales exactly the multiples of p**b1, which is
    the same rule as the pointwise prime-power formula.
    """
    bb = as_bexp(b)
    if x < 1:
        raise ValueError(f"need x >= 1, got {x}")
    if primes is None:
        primes = sieve_primes(max(2, int(round(x ** (1.0 / bb.b1))) + 1))
    vals = np.ones(x + 1, dtype=np.float64)
    vals[0] = 0.0
    for p in primes.tolist():
        step = p**bb.b1
        if step > x:
            break
        vals[step::step] *= 1.0 - 1.0 / p**bb.b2
    return vals


def f_bs_value(b, shifts: Sequence[int], n: int, tables: PrimeTables | None = None) -> float:
    """Shifted Mobius sum over tuples (d_1..d_J): each d_j**b1 | n - s_j,
    the d_j pairwise coprime, summing prod mu(d_j) / (prod d_j)**b2.

    Only squarefree d_j built from primes p with p**b1 | n - s_j contribute,
    so the sum runs over subset choices with disjoint prime supports.
    Defined for n beyond every |s_j|; with J = 1, s = 0 this is f_b(n).
    """
    bb = as_bexp(b)
    s = tuple(int(v) for v in shifts)
    if not s:
        raise ValueError("need at least one shift")
    if n <= max(abs(v) for v in s):
        raise ValueError(f"n must exceed every |shift|, got n={n}, shifts={s}")
    prime_sets = []
    for sj in s:
        m = n - sj
        prime_sets.append([p for p, k in factorize_distinct(m, tables) if k >= bb.b1])

    def over_subsets(j: int, used: set[int]) -> float:
        if j == len(s):
            return 1.0
        avail = [p for p in prime_sets[j] if p not in used]
        total = 0.0
        for mask in range(1 << len(avail)):
            chosen = [p for idx, p in enumerate(avail) if mask >> idx & 1]
            d = math.prod(chosen)
            sign = -1.0 if len(chosen) % 2 else 1.0
            total += sign / d**bb.b2 * over_subsets(j + 1, used | set(chosen))
        return total

    return over_subsets(0, set())


@dataclass(frozen=True)
class MeanValueReport:
    """One partial-sum comparison against its predicted main term.

    ``error_ratio`` normalizes abs_error by the expected scale of the error
    term: log(x)**J for the shifted sums, sqrt(x) for walker moments.
    """

    x: int
    partial_sum: float
    predicted_main: float
    abs_error: float
    error_ratio: float


def mean_value_check(
    kind: str,
    b,
    x: int,
    *,
    r: int | None = None,
    shifts: Sequence[int] | None = None,
    tol: float = 1e-9,
    tables: PrimeTables | None = None,
) -> MeanValueReport:
    """Compare a partial sum of f_b**r (kind "walker-moment") or f_{b,s}
    (kind "watchpoints-shifted") with density * x.

    Stated for b1 <= b2 only; swap the axes to handle the mirrored case.
    The shifted sum starts just past max|s_j| (earlier terms are undefined);
    that offset is part of the reported error.
    """
    bb = as_bexp(b)
    if bb.b1 > bb.b2:
        raise ValueError("mean-value sums assume b1 <= b2; swap the axes first")
    if x < 100:
        raise ValueError(f"need x >= 100, got {x}")
    if kind == "walker-moment":
        if r is None or r < 1:
            raise ValueError("walker-moment needs r >= 1")
        vals = f_b_values_upto(bb, x)
        partial = float(math.fsum(np.power(vals[1:], r).tolist()))
        theory = density_walkers(bb, r, tol)
        scale = math.sqrt(x)
    elif kind == "watchpoints-shifted":
        if not shifts:
            raise ValueError("watchpoints-shifted needs a nonempty shift vector")
        s = tuple(int(v) for v in shifts)
        s_max = max(abs(v) for v in s)
        if len(s) == 1:
            # f_{b,(s1)}(n) = f_b(n - s1): one shifted slice of the f_b table
            vals = f_b_values_upto(bb, x - s[0] if s[0] < 0 else x)
            lo = s_max + 1 - s[0]
            hi = x - s[0]
            partial = float(math.fsum(vals[lo : hi + 1].tolist()))
        else:
            partial = math.fsum(f_bs_value(bb, s, n, tables) for n in range(s_max + 1, x + 1))
        theory = density_watchpoints(bb, len(s), tol)
        scale = math.log(x) ** len(s)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    predicted = theory.value * x
    abs_error = abs(partial - predicted)
    return MeanValueReport(x, partial, predicted, abs_error, abs_error / scale)


def _binomial_pmf_row(alpha: float, n: int) -> np.ndarray:
    """pmf of Binomial(n, alpha) for k = 0..n, in extended precision.

    Anchored at k = 0 and built by the multiplicative recurrence in
    longdouble, which stays far inside the 1e-12 round-off budget of the
    partition identity and never underflows at the n used here.
    """
    a = np.longdouble(alpha)
    row = np.empty(n + 1, dtype=np.longdouble)
    row[0] = (1 - a) ** np.longdouble(n)
    if n:
        k = np.arange(1, n + 1, dtype=np.longdouble)
        ratios = (np.longdouble(n) - k + 1) / k * (a / (1 - a))
        row[1:] = row[0] * np.cumprod(ratios)
    return row


def binomial_congruence_sum(alpha: float, n: int, d: int, a: int) -> float:
    """Binomial(n, alpha) mass on the residue class k = a (mod d).

    Tends to 1/d at rate O(n^-1/2); d = 1 gives the whole mass, and the d
    classes of any modulus partition it.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if not 1 <= d <= n:
        raise ValueError(f"need 1 <= d <= n, got d={d}, n={n}")
    if not 0 <= a < d:
        raise ValueError(f"residue must satisfy 0 <= a < d, got a={a}")
    row = _binomial_pmf_row(alpha, n)
    return float(math.fsum(row[a::d].astype(np.float64).tolist()))


def gcdb_conditioned_binomial_sum(
    b,
    alpha: float,
    m: int,
    n: int,
    shifts: Sequence[int],
    tshifts: Sequence[int],
    tables: PrimeTables | None = None,
) -> float:
    """Binomial(m, alpha) mass on the k with gcd_b(n - s_j, k - t_j) = 1 for
    every j.

    Requires the pairwise hypothesis gcd_b(s_j1 - s_j2, t_j1 - t_j2) = 1;
    the offending pair is named otherwise.  Tends to f_{b,s}(n).
    """
    bb = as_bexp(b)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if m < 0:
        raise ValueError(f"need m >= 0, got {m}")
    s = tuple(int(v) for v in shifts)
    t = tuple(int(v) for v in tshifts)
    if not s or len(s) != len(t):
        raise ValueError("shift vectors must be nonempty and of equal length")
    if n <= max(abs(v) for v in s):
        raise ValueError(f"n must exceed every |shift|, got n={n}, shifts={s}")
    for j1 in range(len(s)):
        for j2 in range(j1 + 1, len(s)):
            ds, dt = s[j1] - s[j2], t[j1] - t[j2]
            if (ds == 0 and dt == 0) or gcd_b(bb, ds, dt, tables) != 1:
                raise ValueError(
                    f"shift pairs {j1} and {j2} violate the pairwise gcd_b hypothesis: "
                    f"gcd_b({ds}, {dt}) != 1"
                )
    if m == 0:
        row = np.array([1.0])
    else:
        row = _binomial_pmf_row(alpha, m).astype(np.float64)
    k = np.arange(m + 1, dtype=np.int64)
    ok = np.ones(m + 1, dtype=bool)
    for j in range(len(s)):
        target = n - s[j]
        for p, kk in factorize_distinct(target, tables):
            if kk >= bb.b1:
                ok &= (k - t[j]) % p**bb.b2 != 0
    return float(math.fsum(row[ok].tolist()))
