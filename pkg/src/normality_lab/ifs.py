"""Exact affine iterated function systems on the line.

All parameters are rationals (`fractions.Fraction`), so every statement made
here — hull invariance, word composition, conjugation — is checked with exact
arithmetic, never floating point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from .errors import (
    ConfigParseError,
    DegenerateFixedPoints,
    DegenerateHull,
    HullNotInvariant,
    NonContractingMap,
    NonConvergence,
    SymbolOutOfRange,
    WeightSumError,
)

RationalLike = Union[Fraction, int, str]

#: A finite word over the alphabet {1, ..., n}; symbol i selects the i-th map.
Word = tuple


def as_fraction(x: RationalLike) -> Fraction:
    """Coerce ints, Fractions and "num/den" strings to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigParseError(f"bad rational literal {x!r}: {exc}") from exc
    if isinstance(x, float):
        raise ConfigParseError(
            f"refusing float {x!r}; pass an exact rational like '1/3'"
        )
    raise ConfigParseError(f"cannot interpret {x!r} as a rational")


def frac_str(x: Fraction) -> str:
    """Serialize a Fraction losslessly ("2/3", "-1/9", "4")."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class AffineMap:
    """x -> slope * x + offset with exact rational coefficients."""

    slope: Fraction
    offset: Fraction

    def __call__(self, x: Fraction) -> Fraction:
        return self.slope * x + self.offset

    def after(self, other: "AffineMap") -> "AffineMap":
        """Composition self o other (apply `other` first)."""
        return AffineMap(self.slope * other.slope,
                         self.slope * other.offset + self.offset)

    def inverse(self) -> "AffineMap":
        if self.slope == 0:
            raise NonContractingMap("slope 0 map is not invertible")
        return AffineMap(1 / self.slope, -self.offset / self.slope)

    def fixed_point(self) -> Fraction:
        if self.slope == 1:
            raise DegenerateHull("slope-1 map has no unique fixed point")
        return self.offset / (1 - self.slope)

    def image(self, lo: Fraction, hi: Fraction) -> tuple:
        """Exact image interval of [lo, hi]; handles orientation reversal."""
        a, b = self(lo), self(hi)
        return (a, b) if a <= b else (b, a)

    def __repr__(self):
        return f"AffineMap({frac_str(self.slope)}, {frac_str(self.offset)})"


IDENTITY = AffineMap(Fraction(1), Fraction(0))


@dataclass(frozen=True)
class SelfSimilarSystem:
    """Contracting affine maps with a probability vector and an invariant hull.

    `maps` are 1-indexed by word symbols, matching the alphabet {1, ..., n}.
    The hull is the convex hull [a, b] of the attractor; validity (each map
    sending the hull into itself, weights summing to one, ...) is checked by
    :func:`validate`, not by the constructor.
    """

    maps: tuple
    weights: tuple
    hull: tuple

    @property
    def n(self) -> int:
        return len(self.maps)

    @property
    def hull_width(self) -> Fraction:
        return self.hull[1] - self.hull[0]

    @property
    def contraction(self) -> Fraction:
        """rho = max |slope|."""
        return max(abs(m.slope) for m in self.maps)

    @property
    def min_slope(self) -> Fraction:
        return min(abs(m.slope) for m in self.maps)

    def map_for(self, symbol: int) -> AffineMap:
        if not (1 <= symbol <= len(self.maps)):
            raise SymbolOutOfRange(
                f"symbol {symbol} outside alphabet 1..{len(self.maps)}")
        return self.maps[symbol - 1]

    def __repr__(self):
        return (f"SelfSimilarSystem(n={self.n}, "
                f"hull=[{frac_str(self.hull[0])}, {frac_str(self.hull[1])}])")


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    failures: tuple

    def raise_first(self):
        if not self.ok:
            raise self.failures[0]


def make_system(maps: Iterable, weights: Optional[Iterable] = None,
                hull: Optional[tuple] = None,
                check: bool = True) -> SelfSimilarSystem:
    """Build a system from (slope, offset) pairs; raises on invalid input
    unless `check` is False (used to report all failures on raw input).

    `weights` defaults to the uniform vector. `hull` is computed exactly from
    the maps when omitted.
    """
    amaps = tuple(
        m if isinstance(m, AffineMap) else AffineMap(as_fraction(m[0]), as_fraction(m[1]))
        for m in maps
    )
    if weights is None:
        n = max(len(amaps), 1)
        w = tuple(Fraction(1, n) for _ in amaps)
    else:
        w = tuple(as_fraction(x) for x in weights)
    if hull is None:
        try:
            hull = attractor_hull(amaps)
        except NonContractingMap:
            if check:
                raise
            hull = (Fraction(0), Fraction(0))
    else:
        hull = (as_fraction(hull[0]), as_fraction(hull[1]))
    system = SelfSimilarSystem(amaps, w, hull)
    if check:
        validate(system).raise_first()
    return system


def validate(system: SelfSimilarSystem) -> ValidationReport:
    """Check every type invariant exactly; collects all failures."""
    failures = []
    if len(system.maps) < 2:
        failures.append(DegenerateFixedPoints("need at least two maps"))
    for i, m in enumerate(system.maps, start=1):
        if m.slope == 0 or abs(m.slope) >= 1:
            failures.append(NonContractingMap(
                f"map {i} slope {frac_str(m.slope)} not in (0,1) by modulus"))
    if len(system.weights) != len(system.maps):
        failures.append(WeightSumError(
            f"{len(system.weights)} weights for {len(system.maps)} maps"))
    else:
        if any(w <= 0 for w in system.weights):
            failures.append(WeightSumError("weights must be strictly positive"))
        total = sum(system.weights, Fraction(0))
        if total != 1:
            failures.append(WeightSumError(f"weights sum to {frac_str(total)}, not 1"))
    lo, hi = system.hull
    if lo > hi:
        failures.append(HullNotInvariant("hull endpoints out of order"))
    elif not any(isinstance(f, NonContractingMap) for f in failures):
        for i, m in enumerate(system.maps, start=1):
            ilo, ihi = m.image(lo, hi)
            if ilo < lo or ihi > hi:
                failures.append(HullNotInvariant(
                    f"map {i} sends hull to [{frac_str(ilo)}, {frac_str(ihi)}]"))
        fps = {m.fixed_point() for m in system.maps}
        if len(fps) < 2:
            failures.append(DegenerateFixedPoints(
                "all maps share a fixed point; attractor is a single point"))
    return ValidationReport(ok=not failures, failures=tuple(failures))


def check_word(system: SelfSimilarSystem, word: Sequence) -> None:
    for s in word:
        if not (isinstance(s, int) and 1 <= s <= system.n):
            raise SymbolOutOfRange(
                f"symbol {s!r} outside alphabet 1..{system.n}")


def compose(system: SelfSimilarSystem, word: Sequence) -> AffineMap:
    """Exact composition f_{w_1} o f_{w_2} o ... o f_{w_m}.

    The empty word gives the identity. Internally carried as an integer
    triple (A, B, C) for x -> (A x + B) / C to avoid per-step gcd cost.
    """
    check_word(system, word)
    A, B, C = 1, 0, 1
    triples = _integer_triples(system)
    for s in word:
        a, b, c = triples[s - 1]
        A, B, C = A * a, A * b + B * c, C * c
    return AffineMap(Fraction(A, C), Fraction(B, C))


def _integer_triples(system: SelfSimilarSystem):
    """Per-map (a, b, c) with f(x) = (a x + b)/c and c > 0."""
    out = []
    for m in system.maps:
        c = m.slope.denominator * m.offset.denominator
        a = m.slope.numerator * m.offset.denominator
        b = m.offset.numerator * m.slope.denominator
        out.append((a, b, c))
    return out


def _interval_map(maps: Sequence, lo: Fraction, hi: Fraction) -> tuple:
    """I -> convex hull of the union of map images of I, exactly."""
    los, his = [], []
    for m in maps:
        a, b = m.image(lo, hi)
        los.append(a)
        his.append(b)
    return min(los), max(his)


def attractor_hull(maps: Sequence) -> tuple:
    """Smallest interval [a, b] with f_i([a, b]) inside [a, b] for every map.

    The hull endpoints satisfy a = f_i(a or b) and b = f_j(b or a) for some
    maps i, j (side chosen by slope sign), and the induced endpoint map is a
    contraction, so the fixed interval is unique.  We solve every (i, j)
    candidate pair exactly and certify the solution by an exact fixed-interval
    check.
    """
    maps = tuple(maps)
    for m in maps:
        if m.slope == 0 or abs(m.slope) >= 1:
            raise NonContractingMap(f"slope {frac_str(m.slope)} not contracting")
    for fi in maps:
        for fj in maps:
            cand = _solve_endpoints(fi, fj)
            if cand is None:
                continue
            a, b = cand
            if a > b:
                continue
            if _interval_map(maps, a, b) == (a, b):
                return (a, b)
    raise NonConvergence("no exact fixed interval found for the given maps")


def _solve_endpoints(fi: AffineMap, fj: AffineMap):
    """Solve a = fi(a if slope>0 else b), b = fj(b if slope>0 else a)."""
    si, ti = fi.slope, fi.offset
    sj, tj = fj.slope, fj.offset
    if si > 0 and sj > 0:
        return fi.fixed_point(), fj.fixed_point()
    if si > 0 and sj < 0:
        a = fi.fixed_point()
        return a, sj * a + tj
    if si < 0 and sj > 0:
        b = fj.fixed_point()
        return si * b + ti, b
    det = 1 - si * sj
    if det == 0:
        return None
    a = (si * tj + ti) / det
    return a, sj * a + tj


def normalize(system: SelfSimilarSystem):
    """Conjugate so that the hull becomes exactly [0, 1].

    Returns (normalized system, g) where g maps [0, 1] onto the original hull
    and the new maps are g^-1 o f_i o g.  Weights and slopes are unchanged.
    """
    a, b = system.hull
    w = b - a
    if w == 0:
        raise DegenerateHull("hull is a single point")
    g = AffineMap(w, a)
    if g == IDENTITY:
        return system, g
    new_maps = tuple(
        AffineMap(m.slope, (m.slope * a + m.offset - a) / w) for m in system.maps
    )
    conj = SelfSimilarSystem(new_maps, system.weights,
                             (Fraction(0), Fraction(1)))
    return conj, g


# ------------------------------------------------------------------- file IO

def system_to_dict(system: SelfSimilarSystem) -> dict:
    return {
        "maps": [{"s": frac_str(m.slope), "t": frac_str(m.offset)}
                 for m in system.maps],
        "weights": [frac_str(w) for w in system.weights],
        "hull": [frac_str(system.hull[0]), frac_str(system.hull[1])],
    }


def system_from_dict(data: dict, check: bool = True) -> SelfSimilarSystem:
    try:
        maps = [(d["s"], d["t"]) for d in data["maps"]]
        weights = data.get("weights")
        hull = data.get("hull")
    except (KeyError, TypeError) as exc:
        raise ConfigParseError(f"malformed system definition: {exc}") from exc
    return make_system(maps, weights, hull, check=check)


def save_system(system: SelfSimilarSystem, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(system_to_dict(system), fh, indent=2)
        fh.write("\n")


def load_system(path, check: bool = True) -> SelfSimilarSystem:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigParseError(f"cannot read system file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"{path}: invalid JSON: {exc}") from exc
    return system_from_dict(data, check=check)


# ------------------------------------------------------------ stock examples

def cantor_system() -> SelfSimilarSystem:
    """Middle-thirds Cantor measure: {x/3, (x+2)/3}, weights (1/2, 1/2)."""
    return make_system([("1/3", "0"), ("1/3", "2/3")], ["1/2", "1/2"])


def bernoulli_half_system() -> SelfSimilarSystem:
    """{x/2, (x+1)/2} with equal weights: Lebesgue measure on [0, 1]."""
    return make_system([("1/2", "0"), ("1/2", "1/2")], ["1/2", "1/2"])


def beta_pair_system(beta: RationalLike) -> SelfSimilarSystem:
    """{x/beta, (x+1)/beta} with equal weights, for rational beta > 2."""
    b = as_fraction(beta)
    if b <= 1:
        raise NonContractingMap("beta must exceed 1")
    return make_system([(1 / b, Fraction(0)), (1 / b, 1 / b)], ["1/2", "1/2"])
