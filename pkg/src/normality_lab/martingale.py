"""Stopping times, cylinder pushforward modes, and the orbit/cylinder gap.

For a sampled word w and integer base p, the stopping time beta_n is the
first prefix length whose composed slope magnitude drops below p^-n; the
rescaling factor r = p^n * slope(beta_n prefix) then sits in [min |s_i|, 1).
The Fourier mode of the pushforward T_p^n f_{w|beta_n} measure factors in
closed form as a unit phase times the transform at the rescaled frequency
q * r, which is what lets the orbit average be compared against cylinder
averages without ever sampling the pushforward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidInput
from .fourier import DEFAULT_NODE_BUDGET, FourierValue, fourier_exact
from .ifs import SelfSimilarSystem, _integer_triples
from .sampling import FixedWord, WordStream, digits, orbit_sequence


@dataclass(frozen=True)
class StoppingRecord:
    """Exact data at the stopping time: n, beta_n, the signed slope product
    of the beta_n-prefix, its offset, and the factor r = p^n * slope.

    `prev_derivative` is the slope product at depth beta_n - 1 (1 for the
    empty prefix), kept so minimality is checkable exactly."""

    n: int
    beta: int
    p: int
    derivative: Fraction      # signed slope product at depth beta_n
    prev_derivative: Fraction  # signed slope product at depth beta_n - 1
    offset: Fraction          # offset of the composed prefix map
    r: Fraction

    @property
    def derivative_magnitude(self) -> Fraction:
        return abs(self.derivative)


def stopping_time(system: SelfSimilarSystem, stream, n: int, p: int) -> StoppingRecord:
    """First prefix length m with |slope product| < p^-n, decided exactly."""
    return stopping_records(system, stream, n, p)[n]


def stopping_records(system: SelfSimilarSystem, stream, n_max: int,
                     p: int) -> list:
    """Stopping records for every n = 0..n_max in one pass over the word.

    beta_n is nondecreasing in n, so a single walk maintaining the exact
    composed map (as uncancelled integer triples) serves all n.  The
    comparison |slope| < p^-n is |A| * p^n < C on integers, never floats.
    """
    if not isinstance(p, int) or p < 2:
        raise InvalidInput("p must be an integer >= 2")
    if n_max < 0:
        raise InvalidInput("n_max must be >= 0")
    if isinstance(stream, (tuple, list)):
        stream = FixedWord(stream)
    triples = _integer_triples(system)
    records = []
    A, B, C = 1, 0, 1
    prevA, prevC = 1, 1
    depth = 0
    p_pow = 1  # p^n for the n currently sought
    for n in range(n_max + 1):
        while abs(A) * p_pow >= C:
            prevA, prevC = A, C
            a, b, c = triples[stream.symbol(depth) - 1]
            A, B, C = A * a, A * b + B * c, C * c
            depth += 1
        derivative = Fraction(A, C)
        records.append(StoppingRecord(
            n=n, beta=depth, p=p,
            derivative=derivative,
            prev_derivative=Fraction(prevA, prevC),
            offset=Fraction(B, C),
            r=p_pow * derivative,
        ))
        p_pow *= p
    return records


def r_factor(record: StoppingRecord) -> Fraction:
    """The rescaling factor r, re-validated against its exact bounds.

    |r| < 1 restates the stopping rule; |r| >= |last slope| follows from
    minimality (the previous prefix product was still >= p^-n), and the last
    slope is recoverable from the record as derivative / prev_derivative.
    """
    r = record.r
    if not abs(r) < 1:
        raise InvalidInput("record violates the stopping rule: |r| >= 1")
    last_slope = record.derivative / record.prev_derivative
    if not abs(r) >= abs(last_slope):
        raise InvalidInput("record violates minimality: |r| < |s_last|")
    return r


def min_stopping_depth(system: SelfSimilarSystem, n: int, p: int) -> int:
    """Smallest L with (min |s_i|)^L <= p^-n: the exact c*n lower bound."""
    smin = system.min_slope
    if n == 0:
        return 0
    num, den = smin.numerator, smin.denominator
    target = p ** n
    L = max(0, math.floor(n * math.log(p) / math.log(1.0 / float(smin))) - 2)
    while abs(num) ** L * target > den ** L:
        L += 1
    while L > 0 and abs(num) ** (L - 1) * target <= den ** (L - 1):
        L -= 1
    return L


_FREQ_ROUND_BITS = 48

# Float product-chain shortcut: only for homogeneous systems (one common
# slope, so the recursion is a single frequency chain even in floats) and
# small frequencies, where phase arguments stay far from the float cliff.
_FLOAT_CHAIN_MAX_FREQ = 1024.0
_FLOAT_CHAIN_SLACK = 1e-8


def _homogeneous_slope(system: SelfSimilarSystem):
    slopes = {m.slope for m in system.maps}
    return slopes.pop() if len(slopes) == 1 else None


def _phase_from_ratio(num: int, den: int) -> complex:
    """e^{2 pi i num/den} for 0 <= num < den, without Fraction reduction.

    Big-integer true division is correctly rounded, so the phase argument is
    accurate to one ulp no matter how large the reduced denominator is.
    """
    if num == 0:
        return complex(1.0, 0.0)
    if 2 * num == den:
        return complex(-1.0, 0.0)
    if 4 * num == den:
        return complex(0.0, 1.0)
    if 4 * num == 3 * den:
        return complex(0.0, -1.0)
    arg = 2.0 * math.pi * (num / den)
    return complex(math.cos(arg), math.sin(arg))


def _float_chain_value(system: SelfSimilarSystem, u: float, tol: float):
    """F_u for a homogeneous system by the truncated product, in floats.

    Valid for |u| <= _FLOAT_CHAIN_MAX_FREQ: phase arguments never exceed a
    few thousand radians, so accumulated rounding stays below the
    _FLOAT_CHAIN_SLACK allowance added to the error bound.
    """
    s = float(_homogeneous_slope(system))
    lo, hi = float(system.hull[0]), float(system.hull[1])
    half = (hi - lo) / 2.0
    center = (lo + hi) / 2.0
    offsets = [float(m.offset) for m in system.maps]
    probs = [float(w) for w in system.weights]
    two_pi = 2.0 * math.pi
    val = complex(1.0, 0.0)
    guard = 0
    while two_pi * abs(u) * half > tol:
        val *= sum(p * complex(math.cos(two_pi * u * t),
                               math.sin(two_pi * u * t))
                   for p, t in zip(probs, offsets))
        u *= s
        guard += 1
        if guard > 4000:
            raise InvalidInput("chain failed to contract")
    trunc = two_pi * abs(u) * half
    val *= complex(math.cos(two_pi * u * center),
                   math.sin(two_pi * u * center))
    return val, trunc + _FLOAT_CHAIN_SLACK


def _round_frequency(u: Fraction):
    """Dyadic rounding for huge exact frequencies; returns (u', extra error).

    |F_u - F_u'| <= 2 pi |u - u'| sup|x| over the support, and rounding to
    the 2^-48 grid keeps |u - u'| below 2^-49; only applied when the exact
    denominator is too large to be worth carrying through the recursion.
    """
    if u.denominator.bit_length() <= 64:
        return u, 0.0
    num = u.numerator << _FREQ_ROUND_BITS
    q, rem = divmod(num, u.denominator)
    if 2 * rem >= u.denominator:
        q += 1
    rounded = Fraction(q, 1 << _FREQ_ROUND_BITS)
    return rounded, 2.0 * math.pi * 2.0 ** -(_FREQ_ROUND_BITS + 1)


def cylinder_mode(system: SelfSimilarSystem, record: StoppingRecord, q: int,
                  tol: float = 1e-6, cache: Optional[dict] = None,
                  budget: int = DEFAULT_NODE_BUDGET) -> FourierValue:
    """Fourier mode of the cylinder pushforward T_p^n f_{w|beta_n} measure.

    For integer q the mod-1 shifts drop out of the exponential, leaving the
    closed form e^{2 pi i q p^n f(0)} * F_{q r}; the phase argument is
    reduced mod 1 with exact integer arithmetic, so n in the tens of
    thousands costs nothing in accuracy.
    """
    if not isinstance(q, int):
        raise InvalidInput("cylinder modes are defined for integer q")
    n, p = record.n, record.p
    off = record.offset
    # q * p^n * offset mod 1, computed modulo the offset denominator; the
    # reduced ratio feeds the phase without a normalized Fraction (the gcd on
    # ten-kilobit denominators would dominate the whole experiment)
    den = off.denominator
    num = (q * pow(p, n, den) * (off.numerator % den)) % den
    phase = _phase_from_ratio(num, den)
    u_float = q * float(record.r)
    if (_homogeneous_slope(system) is not None
            and abs(u_float) <= _FLOAT_CHAIN_MAX_FREQ):
        cv, err = _float_chain_value(system, u_float, tol)
        val = phase * cv
        return FourierValue(val.real, val.imag, err, Fraction(q))
    max_support = max(abs(float(system.hull[0])), abs(float(system.hull[1])), 1.0)
    u, extra = _round_frequency(q * record.r)
    fv = fourier_exact(system, u, tol=tol, cache=cache, budget=budget)
    val = phase * fv.value
    return FourierValue(val.real, val.imag, fv.error_bound + extra * max_support,
                        Fraction(q), nodes=fv.nodes,
                        budget_exceeded=fv.budget_exceeded)


@dataclass(frozen=True)
class GapSeries:
    """|empirical mode - cylinder-average mode| along a schedule of N."""

    q: int
    p: int
    n_values: tuple
    empirical: tuple        # complex empirical modes per N
    cylinder: tuple         # complex cylinder-average modes per N
    gaps: tuple
    seed: Optional[int] = None
    tol: float = 1e-6


def martingale_gap(system: SelfSimilarSystem, seed: int, q: int,
                   n_list: Sequence[int], p: int,
                   tol: float = 1e-6) -> GapSeries:
    """Both sides of the orbit-vs-cylinder comparison on one sampled word.

    The empirical side reads T_p^n(x_w) for n = 0..N-1 off a single certified
    digit stream; the cylinder side averages the closed-form modes of
    T_p^n f_{w|beta_n} over the same n, on the same word.  Returns the
    absolute difference per N in the (increasing) schedule.
    """
    return martingale_gaps(system, seed, [q], n_list, p, tol=tol)[0]


def martingale_gaps(system: SelfSimilarSystem, seed: int, qs: Sequence[int],
                    n_list: Sequence[int], p: int,
                    tol: float = 1e-6) -> list:
    """Gap series for several frequencies on one shared sampled word.

    The word stream, stopping records and digit stream are computed once per
    seed; per-frequency work is only the phase sums and cylinder modes.
    """
    n_list = sorted(set(int(n) for n in n_list))
    if not n_list or n_list[0] < 1:
        raise InvalidInput("N list must contain positive integers")
    n_max = n_list[-1]
    stream = WordStream(system, seed)

    records = stopping_records(system, stream, n_max - 1, p)
    tail = 1
    while p ** tail < (1 << 60):
        tail += 1
    ds = digits(system, stream, p, n_max + tail + 1)
    orbit = orbit_sequence(ds, n_max, seed=seed)

    out = []
    cache: dict = {}
    for q in qs:
        phases = np.exp((2.0j * math.pi * q) * orbit.values)
        emp_cum = np.cumsum(phases)
        cyl = np.empty(n_max, dtype=np.complex128)
        for rec in records:
            fv = cylinder_mode(system, rec, q, tol=tol, cache=cache)
            cyl[rec.n] = fv.value
        cyl_cum = np.cumsum(cyl)
        empirical, cylinder, gaps = [], [], []
        for n in n_list:
            e = complex(emp_cum[n - 1] / n)
            c = complex(cyl_cum[n - 1] / n)
            empirical.append(e)
            cylinder.append(c)
            gaps.append(abs(e - c))
        out.append(GapSeries(q, p, tuple(n_list), tuple(empirical),
                             tuple(cylinder), tuple(gaps), seed=seed, tol=tol))
    return out
