"""Shared parameter types, subset enumeration, and 1-D lower convex envelopes.

All quantities in the DoF calculus are exact rationals (fractions.Fraction);
floats only appear in the physical layer's float mode.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb
from numbers import Rational


def as_fraction(x) -> Fraction:
    """Coerce an int / Fraction / "p/q" string / gmpy2.mpq to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, float):
        raise TypeError(f"refusing to coerce float {x!r} to an exact rational")
    # gmpy2.mpq is not registered as numbers.Rational but has the attributes
    if hasattr(x, "numerator") and hasattr(x, "denominator"):
        return Fraction(int(x.numerator), int(x.denominator))
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


@dataclass(frozen=True)
class SystemParams:
    """Network parameters: library size, transmitter/receiver counts and cache sizes.

    Cache sizes are in units of files. The transmitter caches must collectively
    be able to hold the whole library (m_tx >= n_files / n_tx).
    """

    n_files: int
    n_tx: int
    n_rx: int
    m_tx: Fraction
    m_rx: Fraction

    def __post_init__(self):
        object.__setattr__(self, "m_tx", as_fraction(self.m_tx))
        object.__setattr__(self, "m_rx", as_fraction(self.m_rx))
        if self.n_files < 1 or self.n_tx < 1 or self.n_rx < 1:
            raise ValueError("n_files, n_tx, n_rx must be positive integers")
        if not 0 <= self.m_rx <= self.n_files:
            raise ValueError(f"m_rx={self.m_rx} outside [0, {self.n_files}]")
        if self.m_tx * self.n_tx < self.n_files:
            raise ValueError(
                f"m_tx={self.m_tx} too small: transmitter caches must collectively "
                f"hold the library (m_tx >= {Fraction(self.n_files, self.n_tx)})"
            )

    @property
    def kappa(self) -> Fraction:
        """Normalized cumulative receiver memory n_rx * m_rx / n_files."""
        return Fraction(self.n_rx) * self.m_rx / self.n_files

    @property
    def kappa_int(self) -> int:
        k = self.kappa
        if k.denominator != 1:
            raise ValueError(
                f"kappa={k} is not an integer; pick m_rx on the corner grid "
                f"(multiples of {Fraction(self.n_files, self.n_rx)}) or work at "
                "the curve level via the convex envelope"
            )
        return int(k)

    @property
    def sigma(self) -> int:
        """Multicast size kappa + 1 used by the separation interface."""
        return self.kappa_int + 1

    def with_m_rx(self, m_rx) -> "SystemParams":
        return SystemParams(self.n_files, self.n_tx, self.n_rx, self.m_tx, as_fraction(m_rx))


def validate_subset(members, ground_size: int) -> tuple[int, ...]:
    """Canonicalize a receiver subset: sorted, distinct, 1-based, in range."""
    s = tuple(sorted(members))
    if len(set(s)) != len(s):
        raise ValueError(f"duplicate receiver indices in {members!r}")
    if s and (s[0] < 1 or s[-1] > ground_size):
        raise ValueError(f"receiver indices {s} out of range 1..{ground_size}")
    return s


def subsets_of_size(ground_size: int, k: int) -> list[tuple[int, ...]]:
    """All k-subsets of {1..ground_size} as sorted tuples, in lexicographic order.

    k = 0 yields the single empty tuple (the no-receiver-caching placement case).
    """
    if not 0 <= k <= ground_size:
        raise ValueError(f"subset size {k} outside 0..{ground_size}")
    out = list(combinations(range(1, ground_size + 1), k))
    assert len(out) == comb(ground_size, k)
    return out


@dataclass(frozen=True)
class PiecewiseLinear:
    """Piecewise-linear function given by breakpoints with strictly increasing x.

    Evaluation between breakpoints is linear interpolation; outside the
    breakpoint range it raises.
    """

    breakpoints: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        bps = tuple((as_fraction(x), as_fraction(y)) for x, y in self.breakpoints)
        object.__setattr__(self, "breakpoints", bps)
        xs = [x for x, _ in bps]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("breakpoint x values must be strictly increasing")
        if not bps:
            raise ValueError("need at least one breakpoint")

    @property
    def x_min(self) -> Fraction:
        return self.breakpoints[0][0]

    @property
    def x_max(self) -> Fraction:
        return self.breakpoints[-1][0]

    def __call__(self, x) -> Fraction:
        x = as_fraction(x)
        if not self.x_min <= x <= self.x_max:
            raise ValueError(f"x={x} outside [{self.x_min}, {self.x_max}]")
        xs = [bx for bx, _ in self.breakpoints]
        i = bisect.bisect_right(xs, x)
        if i == len(xs):
            return self.breakpoints[-1][1]
        (x0, y0), (x1, y1) = self.breakpoints[i - 1], self.breakpoints[i]
        if x == x0:
            return y0
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def slopes(self) -> list[Fraction]:
        return [
            (y1 - y0) / (x1 - x0)
            for (x0, y0), (x1, y1) in zip(self.breakpoints, self.breakpoints[1:])
        ]

    def is_convex(self) -> bool:
        s = self.slopes()
        return all(b >= a for a, b in zip(s, s[1:]))


def lower_convex_envelope(points) -> PiecewiseLinear:
    """Greatest convex function lying below a finite point set.

    The result's breakpoints are a subset of the input points (lower hull,
    collinear interior points dropped). Needs >= 2 points with distinct x.
    """
    pts = sorted((as_fraction(x), as_fraction(y)) for x, y in points)
    if len(pts) < 2:
        raise ValueError("lower convex envelope needs at least 2 points")
    xs = [x for x, _ in pts]
    if any(b == a for a, b in zip(xs, xs[1:])):
        raise ValueError("input points must have distinct x values")
    hull: list[tuple[Fraction, Fraction]] = []
    for p in pts:
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            # pop the middle point when it lies on or above the chord
            if (y1 - y0) * (p[0] - x0) >= (p[1] - y0) * (x1 - x0):
                hull.pop()
            else:
                break
        hull.append(p)
    return PiecewiseLinear(tuple(hull))
