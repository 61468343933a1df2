"""Arithmetic classifiers for normality obstructions.

Three decision procedures, all exact:

* log-commensurability of a rational contraction ratio with an integer base,
  decided through prime factorizations;
* Pisot certification of a monic integer polynomial, via Sturm isolation of
  real roots and a posteriori disk bounds for complex conjugate pairs;
* the obstruction-form check of a system against a base b (slope
  commensurability plus the translation form k / b^j), applied to the
  hull-normalized system.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import gcd, isqrt
from typing import Optional, Sequence

import mpmath
import sympy

from .errors import (
    InvalidInput,
    NotAlgebraicInteger,
    PrecisionExhausted,
    ReduciblePolynomial,
)
from .ifs import AffineMap, SelfSimilarSystem, normalize

_TRIAL_LIMIT = 10 ** 6
# Cofactors this large that resist the general factorizer are reported as
# indeterminate rather than guessed at.
_FACTOR_HARD_LIMIT = 10 ** 80


def factor_positive(n: int) -> Optional[dict]:
    """Certified prime factorization of n >= 1, or None if out of reach."""
    if n < 1:
        raise InvalidInput("factor_positive expects n >= 1")
    if n == 1:
        return {}
    partial = sympy.factorint(n, limit=_TRIAL_LIMIT)
    out: dict = {}
    for f, e in partial.items():
        if sympy.isprime(f):
            out[f] = out.get(f, 0) + e
            continue
        if f > _FACTOR_HARD_LIMIT:
            return None
        for p, k in sympy.factorint(f).items():
            out[p] = out.get(p, 0) + e * k
    return out


@dataclass(frozen=True)
class CommensurabilityResult:
    """Outcome of the log|s| / log b rationality test.

    `commensurable` is None when a factorization was out of reach and the
    question could not be decided either way.
    """

    commensurable: Optional[bool]
    ratio: Optional[Fraction]

    @property
    def indeterminate(self) -> bool:
        return self.commensurable is None


def log_commensurable(s, b: int) -> CommensurabilityResult:
    """Decide whether log|s| / log b is rational, for rational s, integer b >= 2.

    Writing |s| = prod p^e_p and b = prod p^f_p, the ratio is rational exactly
    when the exponent vectors are parallel over Q; the common ratio e_p / f_p
    is then returned and the identity |s|^den = b^num re-checked exactly.
    """
    s = Fraction(s)
    if not isinstance(b, int) or b < 2:
        raise InvalidInput("base b must be an integer >= 2")
    if s == 0 or abs(s) == 1:
        raise InvalidInput("s must satisfy s != 0 and |s| != 1")
    a = abs(s)
    num_f = factor_positive(a.numerator)
    den_f = factor_positive(a.denominator)
    base_f = factor_positive(b)
    if num_f is None or den_f is None or base_f is None:
        return CommensurabilityResult(None, None)
    exps: dict = dict(num_f)
    for p, e in den_f.items():
        exps[p] = exps.get(p, 0) - e
    exps = {p: e for p, e in exps.items() if e != 0}
    if set(exps) != set(base_f):
        return CommensurabilityResult(False, None)
    ratios = {Fraction(exps[p], base_f[p]) for p in exps}
    if len(ratios) != 1:
        return CommensurabilityResult(False, None)
    ratio = ratios.pop()
    assert a ** ratio.denominator == Fraction(b) ** ratio.numerator
    return CommensurabilityResult(True, ratio)


# ----------------------------------------------------------- real root tools

def poly_eval(coeffs: Sequence, x: Fraction) -> Fraction:
    """Horner evaluation; `coeffs` are listed from the leading term down."""
    acc = Fraction(0)
    for c in coeffs:
        acc = acc * x + c
    return acc


def poly_deriv(coeffs: Sequence) -> list:
    d = len(coeffs) - 1
    return [c * (d - i) for i, c in enumerate(coeffs[:-1])]


def _poly_rem(num, den):
    """Remainder of polynomial division over Q (descending coefficients)."""
    num = list(num)
    dn = len(den)
    while len(num) >= dn:
        q = num[0] / den[0]
        for i in range(1, dn):
            num[i] -= q * den[i]
        num.pop(0)
        while num and num[0] == 0:
            num.pop(0)
    return num


def _sturm_chain(coeffs: Sequence) -> list:
    chain = [[Fraction(c) for c in coeffs]]
    deriv = [Fraction(c) for c in poly_deriv(coeffs)]
    if deriv:
        chain.append(deriv)
    while len(chain[-1]) > 1:
        rem = _poly_rem(chain[-2], chain[-1])
        if not rem:
            break
        chain.append([-c for c in rem])
    return chain


def _sign_changes(chain, x: Fraction) -> int:
    signs = []
    for poly in chain:
        v = poly_eval(poly, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_real_roots(coeffs: Sequence, lo: Fraction, hi: Fraction) -> int:
    """Number of distinct real roots in (lo, hi], by Sturm's theorem."""
    chain = _sturm_chain(coeffs)
    return _sign_changes(chain, Fraction(lo)) - _sign_changes(chain, Fraction(hi))


def cauchy_bound(coeffs: Sequence) -> Fraction:
    if len(coeffs) <= 1:
        return Fraction(1)
    lead = coeffs[0]
    return 1 + max(Fraction(abs(c)) / abs(lead) for c in coeffs[1:])


def isolate_real_roots(coeffs: Sequence) -> list:
    """Disjoint rational intervals (lo, hi], one simple real root in each."""
    chain = _sturm_chain(coeffs)
    bound = cauchy_bound(coeffs)
    out = []

    def split(lo, hi, nlo, nhi):
        k = nlo - nhi
        if k == 0:
            return
        if k == 1:
            out.append((lo, hi))
            return
        mid = (lo + hi) / 2
        # nudge off a root so interval endpoints stay regular
        while poly_eval(coeffs, mid) == 0:
            mid += (hi - lo) / 1000003
        nm = _sign_changes(chain, mid)
        split(lo, mid, nlo, nm)
        split(mid, hi, nm, nhi)

    split(-bound, bound, _sign_changes(chain, -bound), _sign_changes(chain, bound))
    return sorted(out)


def refine_real_root(coeffs: Sequence, lo: Fraction, hi: Fraction,
                     eps: Fraction) -> tuple:
    """Shrink an isolating interval to width <= eps by exact bisection."""
    lo, hi, eps = Fraction(lo), Fraction(hi), Fraction(eps)
    flo = poly_eval(coeffs, lo)
    fhi = poly_eval(coeffs, hi)
    if flo == 0:
        return lo, lo
    if fhi == 0:
        return hi, hi
    if (flo > 0) == (fhi > 0):
        raise InvalidInput("interval endpoints must bracket a sign change")
    while hi - lo > eps:
        mid = (lo + hi) / 2
        fm = poly_eval(coeffs, mid)
        if fm == 0:
            return mid, mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return lo, hi


@dataclass(frozen=True)
class AlgebraicReal:
    """A real algebraic number pinned down by a polynomial and an enclosure.

    The polynomial need not be minimal, but (lo, hi) must bracket exactly one
    simple root (a sign change).
    """

    coeffs: tuple
    lo: Fraction
    hi: Fraction

    def refine(self, eps) -> tuple:
        return refine_real_root(self.coeffs, self.lo, self.hi, eps)


# ------------------------------------------------------- Pisot certification

@dataclass(frozen=True)
class PisotReport:
    polynomial: tuple
    dominant_root: Optional[tuple]   # rational enclosure (lo, hi), root > 1
    conjugate_moduli: tuple          # rational enclosures (lo, hi) per conjugate
    is_pisot: bool
    reciprocal: bool = False


def _sqrt_bounds(x: Fraction) -> tuple:
    """Rational lower/upper bounds for sqrt(x), x >= 0."""
    if x < 0:
        raise InvalidInput("negative radicand")
    r = isqrt(x.numerator * x.denominator)
    return Fraction(r, x.denominator), Fraction(r + 1, x.denominator)


def _is_reciprocal(coeffs: Sequence) -> bool:
    """True when x^d p(1/x) == p(0) p(x); the only way roots can sit on |z|=1."""
    p0 = coeffs[-1]
    if abs(p0) != 1:
        return False
    return list(reversed(coeffs)) == [p0 * c for c in coeffs]


def _approx_complex_roots(coeffs, dps):
    threshold = mpmath.mpf(10) ** (-dps // 2)
    try:
        with mpmath.workdps(dps):
            roots = mpmath.polyroots([mpmath.mpf(c) for c in coeffs],
                                     maxsteps=500, extraprec=dps * 4)
            return [mpmath.mpc(r) for r in roots if mpmath.im(r) > threshold]
    except Exception:
        return None


def _to_fraction(x, bits) -> Fraction:
    scaled = int(mpmath.floor(x * (1 << bits) + mpmath.mpf("0.5")))
    return Fraction(scaled, 1 << bits)


def _complex_poly_eval(coeffs, xr: Fraction, xi: Fraction) -> tuple:
    ar, ai = Fraction(0), Fraction(0)
    for c in coeffs:
        ar, ai = ar * xr - ai * xi + c, ar * xi + ai * xr
    return ar, ai


def _complex_disks(coeffs, dps, bits):
    """Certified (center, radius) disks around the upper-half-plane roots.

    Every disk D(w, d * |p(w) / p'(w)|) contains at least one root of p, so a
    pairwise disjoint family isolates one root each.  Radii are exact rational
    upper bounds evaluated at dyadic approximations of the numeric roots.
    """
    d = len(coeffs) - 1
    deriv = poly_deriv(coeffs)
    approx = _approx_complex_roots(coeffs, dps)
    if approx is None:
        return None
    disks = []
    for z in approx:
        with mpmath.workdps(dps):
            wr = _to_fraction(mpmath.re(z), bits)
            wi = _to_fraction(mpmath.im(z), bits)
        pr, pi = _complex_poly_eval(coeffs, wr, wi)
        dr, di = _complex_poly_eval(deriv, wr, wi)
        num_sq = pr * pr + pi * pi
        den_sq = dr * dr + di * di
        if den_sq == 0:
            return None
        _, num_up = _sqrt_bounds(num_sq)
        den_lo, _ = _sqrt_bounds(den_sq)
        if den_lo == 0:
            return None
        disks.append(((wr, wi), d * num_up / den_lo))
    return disks


def _disks_valid(disks) -> bool:
    for i in range(len(disks)):
        (xr, xi), r = disks[i]
        # each disk must stay strictly above the real axis (and so clear of
        # its own mirror image and of all real roots)
        if xi <= r:
            return False
        for j in range(i + 1, len(disks)):
            (yr, yi), s = disks[j]
            if (xr - yr) ** 2 + (xi - yi) ** 2 <= (r + s) ** 2:
                return False
    return True


def _modulus_interval(center, radius) -> tuple:
    xr, xi = center
    m_lo, m_hi = _sqrt_bounds(xr * xr + xi * xi)
    return (max(m_lo - radius, Fraction(0)), m_hi + radius)


def _abs_interval(iv) -> tuple:
    lo, hi = iv
    if hi < 0:
        return (-hi, -lo)
    if lo > 0:
        return (lo, hi)
    return (Fraction(0), max(-lo, hi))


def _straddles_one(iv) -> bool:
    return iv[0] <= 1 <= iv[1]


def is_pisot(coeffs: Sequence) -> PisotReport:
    """Decide whether a monic irreducible integer polynomial defines a Pisot
    number: a real root > 1 all of whose algebraic conjugates have modulus
    strictly below 1.

    Real roots are isolated and refined by exact Sturm bisection.  Complex
    conjugate pairs get a posteriori disk enclosures, refined until every
    modulus interval excludes 1.  Roots exactly on the unit circle force the
    polynomial to be self-reciprocal, which is detected by an exact
    coefficient test and settled combinatorially (degree 2: decided by the
    dominant real root; degree >= 4: never Pisot), so refinement always
    terminates.
    """
    coeffs = [int(c) for c in coeffs]
    if len(coeffs) < 2:
        raise InvalidInput("polynomial must have degree >= 1")
    if coeffs[0] != 1:
        raise NotAlgebraicInteger("polynomial must be monic")
    poly = sympy.Poly(coeffs, sympy.Symbol("x"))
    if not poly.is_irreducible:
        raise ReduciblePolynomial(f"{poly.as_expr()} factors over Q")
    coeffs = tuple(coeffs)
    degree = len(coeffs) - 1

    if degree == 1:
        root = Fraction(-coeffs[1])
        dominant = (root, root) if root > 1 else None
        return PisotReport(coeffs, dominant, (), root > 1)

    reciprocal = _is_reciprocal(coeffs)

    # Real roots, refined until each |root| is decisively above or below 1
    # (irreducibility rules out roots exactly at +-1, so this terminates).
    eps = Fraction(1, 1 << 64)
    refined = [refine_real_root(coeffs, lo, hi, eps)
               for lo, hi in isolate_real_roots(coeffs)]
    while any(_straddles_one(_abs_interval(iv)) for iv in refined):
        eps /= 1 << 32
        refined = [refine_real_root(coeffs, lo, hi, eps) for lo, hi in refined]
    above_one = [iv for iv in refined if iv[0] > 1]
    dominant = max(above_one, key=lambda iv: iv[0]) if above_one else None

    if reciprocal and degree == 2 and dominant is not None:
        # the unique conjugate is +-1/theta
        lo, hi = dominant
        return PisotReport(coeffs, dominant, ((1 / hi, 1 / lo),), True,
                           reciprocal=True)

    n_real = len(refined)
    if (degree - n_real) % 2 != 0:
        raise PrecisionExhausted("real root count inconsistent with degree")
    need_pairs = (degree - n_real) // 2

    complex_moduli = None
    for dps, bits in ((40, 96), (80, 192), (160, 384), (320, 768), (640, 1536)):
        disks = _complex_disks(coeffs, dps, bits)
        if disks is None or len(disks) != need_pairs or not _disks_valid(disks):
            continue
        moduli = []
        for center, radius in disks:
            iv = _modulus_interval(center, radius)
            moduli.append(iv)
            moduli.append(iv)  # mirror conjugate, same modulus
        if not reciprocal and any(_straddles_one(iv) for iv in moduli):
            continue  # refine until decisive; off-circle roots guarantee exit
        complex_moduli = moduli
        break
    if complex_moduli is None:
        raise PrecisionExhausted(
            "could not certify conjugate moduli against 1 at maximum precision")

    conj = list(complex_moduli)
    conj.extend(_abs_interval(iv) for iv in refined if iv is not dominant)
    if reciprocal and degree >= 3 and dominant is not None:
        # roots pair z <-> 1/z: any conjugate pair is on the circle or split
        # across it, so some conjugate has modulus >= 1
        verdict = False
    else:
        verdict = dominant is not None and all(hi < 1 for _, hi in conj)
    return PisotReport(coeffs, dominant, tuple(conj), verdict,
                       reciprocal=reciprocal)


# --------------------------------------------------------- obstruction check

class ObstructionVerdict(Enum):
    MATCHES_OBSTRUCTION_FORM = "MatchesObstructionForm"
    FAILS_ITEM1 = "FailsItem1"
    FAILS_ITEM2 = "FailsItem2"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class MapObstruction:
    index: int                        # 1-based map index
    slope: Fraction
    offset: Fraction                  # offset of the conjugated map
    commensurability: CommensurabilityResult
    translation_form: bool            # offset == k / b^j, integer k, j >= 0
    translation_exponent: Optional[int]


@dataclass(frozen=True)
class ObstructionReport:
    base: int
    conjugator: AffineMap
    per_map: tuple
    verdict: ObstructionVerdict


def _translation_form(t: Fraction, b: int):
    """Check t = k / b^j with integers k and j >= 0 (equivalently: every prime
    of the reduced denominator divides b); returns (ok, minimal j)."""
    d = t.denominator
    if d == 1:
        return True, 0
    x = d
    g = gcd(x, b)
    while g > 1:
        while x % g == 0:
            x //= g
        g = gcd(x, b)
    if x != 1:
        return False, None
    j, power = 0, 1
    while power % d:
        power *= b
        j += 1
    return True, j


def classify_obstruction(system: SelfSimilarSystem, b: int,
                         conjugator: Optional[AffineMap] = None) -> ObstructionReport:
    """Check the algebraic obstruction form for base b on the conjugated system.

    Item 1: every slope log-commensurable with b.  Item 2: every conjugated
    translation of the form k / b^j.  Applied to the hull-normalized system
    unless an explicit conjugating map is supplied.  All parameters here are
    rational; irrational translation structure is outside this classifier.
    """
    if not isinstance(b, int) or b < 2:
        raise InvalidInput("base b must be an integer >= 2")
    if conjugator is None:
        conj, g = normalize(system)
    else:
        g = conjugator
        ginv = g.inverse()
        maps = tuple(ginv.after(m.after(g)) for m in system.maps)
        conj = SelfSimilarSystem(maps, system.weights, ginv.image(*system.hull))
    per_map = []
    for i, m in enumerate(conj.maps, start=1):
        comm = log_commensurable(m.slope, b)
        tform, j = _translation_form(m.offset, b)
        per_map.append(MapObstruction(i, m.slope, m.offset, comm, tform, j))
    if any(mo.commensurability.commensurable is False for mo in per_map):
        verdict = ObstructionVerdict.FAILS_ITEM1
    elif any(mo.commensurability.indeterminate for mo in per_map):
        verdict = ObstructionVerdict.INDETERMINATE
    elif any(not mo.translation_form for mo in per_map):
        verdict = ObstructionVerdict.FAILS_ITEM2
    else:
        verdict = ObstructionVerdict.MATCHES_OBSTRUCTION_FORM
    return ObstructionReport(b, g, tuple(per_map), verdict)


def incommensurable_slope_witness(system: SelfSimilarSystem, b: int):
    """Search for a map whose slope is log-incommensurable with b; such a
    witness certifies pointwise b-normality of the self-similar measure.

    Returns (found, witness 1-based map index or None).  Slopes are invariant
    under affine conjugation, so this matches the negation of item 1 of
    :func:`classify_obstruction` map by map.
    """
    for i, m in enumerate(system.maps, start=1):
        res = log_commensurable(m.slope, b)
        if res.commensurable is False:
            return True, i
    return False, None
