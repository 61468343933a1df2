"""Uniform-distribution and fine-scale statistics of mod-1 sequences.

Star discrepancy, digit-block frequencies, k-level correlations against
compactly supported product test functions, nearest-neighbour level spacings
with the wraparound gap, and a Weyl-sum report.  The correlation enumerator
is windowed: with test-function support below half the sequence length, at
most one integer shift per coordinate contributes, so only circularly close
tuples need visiting.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import (
    BlockLongerThanStream,
    InvalidInput,
    KOutOfRange,
    SupportTooWide,
)
from .fourier import fourier_empirical
from .sampling import DigitStream, SequenceSample


def _values(sample) -> np.ndarray:
    if isinstance(sample, SequenceSample):
        return sample.values
    arr = np.asarray(sample, dtype=np.float64)
    return np.mod(arr, 1.0)


# ------------------------------------------------------------- discrepancy

def discrepancy(sample) -> float:
    """Star discrepancy D*_N, exactly, via the sorted-sample formula.

    D*_N = max over i of max(i/N - x_(i), x_(i) - (i-1)/N); the sup over all
    anchored intervals is attained at one of these 2N candidates.
    """
    xs = np.sort(_values(sample))
    n = len(xs)
    if n == 0:
        raise InvalidInput("sample must be nonempty")
    i = np.arange(1, n + 1, dtype=np.float64)
    return float(np.maximum(i / n - xs, xs - (i - 1) / n).max())


# ---------------------------------------------------------- digit frequencies

@dataclass(frozen=True)
class DigitFrequencyTable:
    base: int
    block_length: int
    counts: dict          # block tuple -> occurrence count
    total: int

    def frequency(self, block) -> float:
        block = tuple(int(b) for b in block) if not isinstance(block, int) \
            else (block,)
        return self.counts.get(block, 0) / self.total


def digit_frequencies(stream: DigitStream, block_length: int) -> DigitFrequencyTable:
    """Sliding-window block counts over the certified digit prefix."""
    if block_length < 1:
        raise InvalidInput("block length must be >= 1")
    m = stream.certified_length
    if block_length > m:
        raise BlockLongerThanStream(
            f"block length {block_length} exceeds certified prefix {m}")
    ds = stream.digits[:m]
    total = m - block_length + 1
    if block_length == 1:
        binc = np.bincount(ds.astype(np.int64), minlength=stream.base)
        counts = {(d,): int(c) for d, c in enumerate(binc) if c > 0}
        return DigitFrequencyTable(stream.base, 1, counts, total)
    windows = np.lib.stride_tricks.sliding_window_view(ds, block_length)
    code = np.zeros(total, dtype=np.int64)
    for j in range(block_length):
        code = code * stream.base + windows[:, j]
    binc = np.bincount(code)
    counts = {}
    for c in np.nonzero(binc)[0]:
        block = []
        v = int(c)
        for _ in range(block_length):
            v, d = divmod(v, stream.base)
            block.append(d)
        counts[tuple(reversed(block))] = int(binc[c])
    return DigitFrequencyTable(stream.base, block_length, counts, total)


# -------------------------------------------------------------- test functions

@dataclass(frozen=True)
class TestFunction:
    """Compactly supported product test function on R^(k-1).

    One-dimensional profile g applied to each coordinate; `kind` is one of
    box, triangle, piecewise-linear.  Box and triangle have exact rational
    integrals, and piecewise-linear profiles integrate exactly by the
    trapezoid rule on their rational breakpoints.
    """

    kind: str
    halfwidth: Fraction
    breakpoints: tuple = ()

    @classmethod
    def box(cls, halfwidth) -> "TestFunction":
        w = Fraction(halfwidth)
        if w <= 0:
            raise InvalidInput("halfwidth must be positive")
        return cls("box", w)

    @classmethod
    def triangle(cls, halfwidth) -> "TestFunction":
        w = Fraction(halfwidth)
        if w <= 0:
            raise InvalidInput("halfwidth must be positive")
        return cls("triangle", w)

    @classmethod
    def piecewise_linear(cls, breakpoints) -> "TestFunction":
        pts = tuple((Fraction(x), Fraction(v)) for x, v in breakpoints)
        if len(pts) < 2 or any(b[0] <= a[0] for a, b in zip(pts, pts[1:])):
            raise InvalidInput("breakpoints must be strictly increasing")
        w = max(abs(pts[0][0]), abs(pts[-1][0]))
        return cls("piecewise-linear", w, pts)

    def profile(self, y: np.ndarray) -> np.ndarray:
        """Evaluate the 1-D profile g on an array of scaled differences."""
        w = float(self.halfwidth)
        if self.kind == "box":
            return (np.abs(y) <= w).astype(np.float64)
        if self.kind == "triangle":
            return np.maximum(0.0, 1.0 - np.abs(y) / w)
        xs = np.array([float(x) for x, _ in self.breakpoints])
        vs = np.array([float(v) for _, v in self.breakpoints])
        return np.interp(y, xs, vs, left=0.0, right=0.0)

    def profile_integral(self) -> Fraction:
        if self.kind == "box":
            return 2 * self.halfwidth
        if self.kind == "triangle":
            return self.halfwidth
        total = Fraction(0)
        for (x0, v0), (x1, v1) in zip(self.breakpoints, self.breakpoints[1:]):
            total += (x1 - x0) * (v0 + v1) / 2
        return total

    def integral(self, dim: int) -> Fraction:
        return self.profile_integral() ** dim

    def describe(self) -> str:
        if self.kind == "piecewise-linear":
            return f"piecewise-linear({len(self.breakpoints)} pts)"
        return f"{self.kind}(halfwidth={self.halfwidth})"


# ----------------------------------------------------------- k-level R_k

@dataclass(frozen=True)
class CorrelationResult:
    k: int
    value: float
    test_function: str
    n: int
    integral: Fraction
    deviation: float


class _Windows:
    """Circular window queries on a sorted copy of the sample."""

    def __init__(self, xs: np.ndarray, radius: float):
        self.sorted = np.sort(xs)
        n = len(xs)
        self.n = n
        self.radius = radius
        self.ext = np.concatenate([self.sorted - 1.0, self.sorted,
                                   self.sorted + 1.0])

    def around(self, x: float) -> np.ndarray:
        """Indices (into the sorted array) within circular distance radius."""
        lo = np.searchsorted(self.ext, x - self.radius, side="left")
        hi = np.searchsorted(self.ext, x + self.radius, side="right")
        return np.arange(lo, hi) % self.n


def _wrap(delta: np.ndarray) -> np.ndarray:
    return delta - np.round(delta)


def k_level_correlation(sample, k: int, f: TestFunction) -> CorrelationResult:
    """The k-level correlation R_k(f, x, N) of the sample.

    Sums f(N * (difference vector + integer shifts)) over ordered k-tuples of
    distinct indices.  Requires the support half-width below N/2, which pins
    the integer shift per coordinate to the circular wrap and licenses the
    windowed enumeration (exactly the tuples whose consecutive circular gaps
    are within support/N).
    """
    xs = _values(sample)
    n = len(xs)
    if not 2 <= k <= 4:
        raise KOutOfRange("k must be between 2 and 4")
    w_scaled = float(f.halfwidth)
    if not w_scaled < n / 2:
        raise SupportTooWide(
            f"support half-width {w_scaled} must be < N/2 = {n / 2}")
    radius = w_scaled / n * (1.0 + 1e-9) + 1e-15
    win = _Windows(xs, radius)
    s = win.sorted

    total = 0.0
    if k == 2:
        for i in range(n):
            idx = win.around(s[i])
            idx = idx[idx != i]
            if len(idx):
                total += f.profile(n * _wrap(s[idx] - s[i])).sum()
    elif k == 3:
        for i in range(n):
            idx = win.around(s[i])
            idx = idx[idx != i]
            if not len(idx):
                continue
            g_in = f.profile(n * _wrap(s[idx] - s[i]))   # u1 candidates
            g_out = f.profile(n * _wrap(s[i] - s[idx]))  # u3 candidates
            total += g_in.sum() * g_out.sum() - (g_in * g_out).sum()
    else:
        for i in range(n):
            idx_i = win.around(s[i])
            idx_i = idx_i[idx_i != i]
            if not len(idx_i):
                continue
            g_mid = f.profile(n * _wrap(s[i] - s[idx_i]))
            for pos, j in enumerate(idx_i):
                if g_mid[pos] == 0.0:
                    continue
                left = idx_i[idx_i != j]
                g1 = f.profile(n * _wrap(s[left] - s[i]))
                idx_j = win.around(s[j])
                right = idx_j[(idx_j != i) & (idx_j != j)]
                g2 = f.profile(n * _wrap(s[j] - s[right]))
                cross = 0.0
                common, ia, ib = np.intersect1d(left, right,
                                                return_indices=True)
                if len(common):
                    cross = float((g1[ia] * g2[ib]).sum())
                total += g_mid[pos] * (g1.sum() * g2.sum() - cross)
    value = total / n
    integral = f.integral(k - 1)
    return CorrelationResult(k, value, f.describe(), n, integral,
                             abs(value - float(integral)))


# ------------------------------------------------------------ level spacings

@dataclass(frozen=True)
class SpacingReport:
    scaled_gaps: np.ndarray       # sorted, scaled by N
    s_grid: np.ndarray
    g_empirical: np.ndarray       # empirical CDF on the grid
    sup_distance: float           # exact KS distance to 1 - exp(-s)

    @property
    def n(self) -> int:
        return len(self.scaled_gaps)


def level_spacings(sample, s_grid: Optional[Sequence[float]] = None) -> SpacingReport:
    """Nearest-neighbour gaps scaled by N, with the wraparound gap.

    Orders the sample, prepends theta_0 = theta_N - 1, scales the N gaps by
    N, evaluates the empirical CDF G on the grid and reports the exact
    sup-distance to the unit-rate exponential law 1 - e^{-s} (attained at a
    jump of G, so computable from the sorted gaps alone).
    """
    xs = np.sort(_values(sample))
    n = len(xs)
    if n < 2:
        raise InvalidInput("need at least two points")
    gaps = np.empty(n)
    gaps[0] = xs[0] - (xs[-1] - 1.0)
    gaps[1:] = np.diff(xs)
    scaled = np.sort(n * gaps)
    if s_grid is None:
        s_grid = np.linspace(0.0, 5.0, 51)
    s_grid = np.asarray(s_grid, dtype=np.float64)
    g_emp = np.searchsorted(scaled, s_grid, side="right") / n
    target = 1.0 - np.exp(-scaled)
    below = np.arange(n) / n          # G just before each jump
    above = np.arange(1, n + 1) / n   # G at each jump
    sup = float(np.maximum(np.abs(above - target),
                           np.abs(below - target)).max())
    return SpacingReport(scaled, s_grid, g_emp, sup)


# ---------------------------------------------------------------- Weyl sums

@dataclass(frozen=True)
class WeylReport:
    q_values: np.ndarray
    moduli: np.ndarray
    error_bounds: np.ndarray
    threshold: float
    flagged: tuple

    def modulus(self, q: int) -> float:
        return float(self.moduli[list(self.q_values).index(q)])


def weyl_report(sample, q_max: int, threshold: float = 0.05) -> WeylReport:
    """Empirical |F_q| for q = 1..q_max with flags above the threshold."""
    if q_max < 1:
        raise InvalidInput("q_max must be >= 1")
    qs = np.arange(1, q_max + 1)
    moduli = np.empty(q_max)
    errs = np.empty(q_max)
    for i, q in enumerate(qs):
        fv = fourier_empirical(sample, int(q))
        moduli[i] = fv.modulus
        errs[i] = fv.error_bound
    flagged = tuple(int(q) for q, m in zip(qs, moduli) if m > threshold)
    return WeylReport(qs, moduli, errs, threshold, flagged)
