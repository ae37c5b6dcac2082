"""Closed-form DoF calculus: achievable curve, gain decomposition, physical-layer
optima, cut-set converse, multiplicative-gap scanner, and the 2x2 curves."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Optional

from .core import PiecewiseLinear, SystemParams, as_fraction, lower_convex_envelope

# ---------------------------------------------------------------------------
# Achievable reciprocal DoF and its gains


def reciprocal_corner(params: SystemParams, kappa: int) -> Fraction:
    """Reciprocal achievable DoF at the corner m_rx = kappa * N / K_r.

    (K_t - 1 + min{K_r/(kappa+1), N}) / K_t * (1 - kappa/K_r); the min term
    covers the small-library partition interface.
    """
    kr, kt, n = params.n_rx, params.n_tx, params.n_files
    if not 0 <= kappa <= kr:
        raise ValueError(f"kappa={kappa} outside 0..{kr}")
    head = (kt - 1 + min(Fraction(kr, kappa + 1), Fraction(n))) / kt
    return head * (1 - Fraction(kappa, kr))


@dataclass(frozen=True)
class DofCurve:
    """Reciprocal-DoF corner points and their lower convex envelope over m_rx."""

    params: SystemParams
    corners: tuple[tuple[Fraction, Fraction], ...]
    envelope: PiecewiseLinear

    def __call__(self, m_rx) -> Fraction:
        return self.envelope(as_fraction(m_rx))


def dof_curve(params: SystemParams) -> DofCurve:
    """Corner values for kappa = 0..K_r plus their lower convex envelope."""
    n, kr = params.n_files, params.n_rx
    corners = tuple(
        (Fraction(k * n, kr), reciprocal_corner(params, k)) for k in range(kr + 1)
    )
    return DofCurve(params, corners, lower_convex_envelope(corners))


@dataclass(frozen=True)
class GainBreakdown:
    """Multiplicative decomposition of the sum DoF into alignment and caching gains."""

    g_ia: Fraction
    g_lc: Fraction
    g_gc: Fraction
    sum_dof: Fraction


def gain_decomposition(params: SystemParams, kappa: int) -> GainBreakdown:
    """Alignment / local-caching / global-caching factors of K_r * DoF.

    Valid when K_r/(kappa+1) <= N; outside that regime use partition_gains.
    The product times reciprocal_corner equals K_r exactly.
    """
    kr, kt, n = params.n_rx, params.n_tx, params.n_files
    if not 0 <= kappa <= kr:
        raise ValueError(f"kappa={kappa} outside 0..{kr}")
    if Fraction(kr, kappa + 1) > n:
        raise ValueError(
            f"K_r/(kappa+1) = {Fraction(kr, kappa + 1)} > N = {n}: the small-library "
            "partition regime applies; use partition_gains"
        )
    if kappa == kr:
        raise ValueError("kappa = K_r has zero reciprocal; no finite gain decomposition")
    g_ia = Fraction(kt * kr, kt + kr - 1)
    g_lc = Fraction(kr, kr - kappa)
    if kt == 1:
        # 1/(1/K_r + 1/(K_t-1)) degenerates to 0; the global gain is kappa + 1
        g_gc = Fraction(kappa + 1)
    else:
        mr_frac = Fraction(kappa, kr)  # = m_rx / N
        harm = 1 / (Fraction(1, kr) + Fraction(1, kt - 1))
        g_gc = (kr * mr_frac + 1) / (mr_frac * harm + 1)
    return GainBreakdown(g_ia, g_lc, g_gc, g_ia * g_lc * g_gc)


@dataclass(frozen=True)
class PartitionGains:
    """Two-factor decomposition for the small-library regime (no global gain).

    sum_dof approximates N * DoF; at m_rx = N it is undefined (g_lc diverges)
    and only the reciprocal form, which is 0 there, is meaningful.
    """

    g_ia: Fraction
    g_lc: Optional[Fraction]
    g_gc: Fraction
    sum_dof: Optional[Fraction]
    reciprocal: Fraction


def partition_gains(params: SystemParams) -> PartitionGains:
    """Gains of the demand-partition interface: N*DoF ~ g_ia * g_lc, g_gc = 1."""
    kr, kt, n = params.n_rx, params.n_tx, params.n_files
    g_ia = Fraction(kt * n, kt + n - 1)
    reciprocal = (1 - params.m_rx / n) * Fraction(kt + min(kr, n) - 1, kt)
    if params.m_rx == n:
        return PartitionGains(g_ia, None, Fraction(1), None, reciprocal)
    g_lc = 1 / (1 - params.m_rx / n)
    return PartitionGains(g_ia, g_lc, Fraction(1), g_ia * g_lc, reciprocal)


# ---------------------------------------------------------------------------
# Physical-layer DoF


def phy_dof_optimal(k_tx: int, k_rx: int, sigma: int) -> Fraction:
    """Optimal per-message DoF of the multiple multicast X-channel."""
    if not 1 <= sigma <= k_rx:
        raise ValueError(f"sigma={sigma} outside 1..{k_rx}")
    return Fraction(1, k_tx * comb(k_rx - 1, sigma - 1) + comb(k_rx - 1, sigma))


def phy_sum_dof(k_tx: int, k_rx: int, sigma: int) -> Fraction:
    """Sum DoF over all K_t * C(K_r, sigma) messages: K_t K_r / ((K_t-1)sigma + K_r)."""
    return k_tx * comb(k_rx, sigma) * phy_dof_optimal(k_tx, k_rx, sigma)


def compound_dof(k_tx: int, n_groups: int) -> Fraction:
    """Per-message DoF of the partition interface, 1/(K_t + N~ - 1)."""
    if n_groups < 1:
        raise ValueError("need at least one demand group")
    return Fraction(1, k_tx + n_groups - 1)


# ---------------------------------------------------------------------------
# Cut-set converse


def cutset_terms(params: SystemParams) -> list[Fraction]:
    """Per-s cut-set terms s(1 - m_rx/floor(N/s)) / min{s, K_t}, clamped at 0."""
    kr, kt, n = params.n_rx, params.n_tx, params.n_files
    out = []
    for s in range(1, min(kr, n) + 1):
        term = s * (1 - params.m_rx / (n // s)) / min(s, kt)
        out.append(max(term, Fraction(0)))
    return out


def cutset_bound(params: SystemParams) -> Fraction:
    """Reciprocal-DoF lower bound: max over cut sizes s of the MIMO cut term."""
    return max(cutset_terms(params))


def _cutset_lines(
    n: int, kt: int, kr: int, smooth: bool = False
) -> list[tuple[Fraction, Fraction]]:
    """Cut-set terms as lines (intercept, slope) in m_rx, before clamping.

    smooth=True replaces floor(N/s) by N/s, the slightly stronger smoothed
    form behind the headline numerical gap figure; the floored form is the
    provable converse.
    """
    lines = [(Fraction(0), Fraction(0))]  # the clamp floor
    for s in range(1, min(kr, n) + 1):
        a = Fraction(s, min(s, kt))
        b = -a / Fraction(n, s) if smooth else -a / (n // s)
        lines.append((a, b))
    return lines


def _upper_envelope(lines, x_lo: Fraction, x_hi: Fraction):
    """Upper envelope of lines (intercept, slope) over [x_lo, x_hi].

    Returns (hull_lines, inner_breakpoints); evaluation of the max walks the
    hull left to right in order of increasing slope.
    """
    best: dict[Fraction, Fraction] = {}
    for a, b in lines:
        if b not in best or a > best[b]:
            best[b] = a
    ordered = sorted((b, a) for b, a in best.items())  # by slope
    hull: list[tuple[Fraction, Fraction]] = []  # (intercept, slope)
    for b, a in ordered:
        while hull:
            if len(hull) == 1:
                a1, b1 = hull[-1]
                # same value everywhere they cross; keep both unless dominated
                if a >= a1 and b >= b1:
                    hull.pop()
                    continue
                break
            a1, b1 = hull[-2]
            a2, b2 = hull[-1]
            # x where hull[-2] meets the new line; hull[-1] must beat both there
            x = (a - a1) / (b1 - b)
            if a2 + b2 * x <= a1 + b1 * x:
                hull.pop()
            else:
                break
        hull.append((a, b))
    breaks = []
    for (a1, b1), (a2, b2) in zip(hull, hull[1:]):
        x = (a2 - a1) / (b1 - b2)
        if x_lo < x < x_hi:
            breaks.append(x)
    return hull, breaks


def _eval_hull(hull, breaks, x: Fraction) -> Fraction:
    i = 0
    while i < len(breaks) and x > breaks[i]:
        i += 1
    a, b = hull[i]
    return a + b * x


@dataclass
class GapReport:
    """Outcome of a multiplicative-gap audit between achievability and converse."""

    description: str
    n_tuples: int
    n_points: int
    max_ratio: Fraction
    argmax: tuple[int, int, int, Fraction]
    violations: list = field(default_factory=list)
    ratios: Optional[dict] = None

    @property
    def max_ratio_float(self) -> float:
        return float(self.max_ratio)


def _tuple_gap(
    n: int,
    kt: int,
    kr: int,
    interior_samples: int = 0,
    grid: str = "breakpoints",
    smooth_cut: bool = False,
):
    """Max over the m_rx grid of envelope(m_rx) / cutset(m_rx) for one tuple.

    grid="breakpoints" evaluates at every breakpoint of either piecewise-linear
    curve, which is the true supremum over m_rx (the ratio of two linears is
    monotone between breakpoints, so the cellwise max sits at an endpoint);
    grid="corners" restricts to the achievability corners m_rx = kappa*N/K_r,
    the coarser grid behind the headline numerical gap figure. Optional
    interior audit samples refine either grid.
    """
    if grid not in ("breakpoints", "corners"):
        raise ValueError(f"unknown m_rx grid {grid!r}")
    params = SystemParams(n, kt, kr, Fraction(n, kt), Fraction(0))
    curve = dof_curve(params)
    hull, cut_breaks = _upper_envelope(
        _cutset_lines(n, kt, kr, smooth_cut), Fraction(0), Fraction(n)
    )
    xs = {x for x, _ in curve.corners}
    if grid == "breakpoints":
        xs.update(cut_breaks)
    xs.discard(Fraction(n))  # both curves vanish at m_rx = N
    xs = sorted(xs)
    if interior_samples:
        extra = []
        for x0, x1 in zip(xs, xs[1:] + [Fraction(n)]):
            step = (x1 - x0) / (interior_samples + 1)
            extra.extend(x0 + step * i for i in range(1, interior_samples + 1))
        xs = sorted(set(xs) | set(extra))
    best = None
    best_x = None
    for x in xs:
        cut = _eval_hull(hull, cut_breaks, x)
        if cut <= 0:
            continue
        ratio = curve.envelope(x) / cut
        if best is None or ratio > best:
            best, best_x = ratio, x
    return best, best_x, len(xs)


def gap_scan(
    n_max: int,
    kt_max: int,
    kr_max: int,
    interior_samples: int = 0,
    keep_ratios: bool = False,
    grid: str = "breakpoints",
    smooth_cut: bool = False,
    progress: Optional[Callable[[int, int], None]] = None,
) -> GapReport:
    """Exhaustive achievability-vs-converse ratio scan over a parameter box.

    For every (N, K_t, K_r) and every m_rx on the breakpoint grid the ratio
    envelope / cutset is >= 1; the report carries the maximum and its argmax
    (lexicographic tie-break on the tuple).
    """
    if min(n_max, kt_max, kr_max) < 1:
        raise ValueError("scan limits must be positive")
    total = n_max * kt_max * kr_max
    done = 0
    max_ratio = Fraction(0)
    argmax = None
    n_points = 0
    violations = []
    ratios = {} if keep_ratios else None
    for n in range(1, n_max + 1):
        for kt in range(1, kt_max + 1):
            for kr in range(1, kr_max + 1):
                r, x, npts = _tuple_gap(n, kt, kr, interior_samples, grid, smooth_cut)
                n_points += npts
                done += 1
                if r is None:
                    continue
                if r < 1:
                    violations.append((n, kt, kr, x, r))
                if ratios is not None:
                    ratios[(n, kt, kr)] = r
                if r > max_ratio:
                    max_ratio, argmax = r, (n, kt, kr, x)
                if progress and done % 2000 == 0:
                    progress(done, total)
    return GapReport(
        description=f"full scan N<={n_max}, K_t<={kt_max}, K_r<={kr_max}",
        n_tuples=total,
        n_points=n_points,
        max_ratio=max_ratio,
        argmax=argmax,
        violations=violations,
        ratios=ratios,
    )


def gap_scan_sample(
    n_max: int,
    kt_max: int,
    kr_max: int,
    n_samples: int,
    seed: int,
    interior_samples: int = 0,
    grid: str = "breakpoints",
    smooth_cut: bool = False,
    progress: Optional[Callable[[int, int], None]] = None,
) -> GapReport:
    """Seeded subsample of the parameter box (without replacement)."""
    universe = n_max * kt_max * kr_max
    n_samples = min(n_samples, universe)
    rng = random.Random(seed)
    picks = rng.sample(range(universe), n_samples)
    max_ratio = Fraction(0)
    argmax = None
    n_points = 0
    violations = []
    for i, code in enumerate(picks):
        n = code // (kt_max * kr_max) + 1
        kt = (code // kr_max) % kt_max + 1
        kr = code % kr_max + 1
        r, x, npts = _tuple_gap(n, kt, kr, interior_samples, grid, smooth_cut)
        n_points += npts
        if r is None:
            continue
        if r < 1:
            violations.append((n, kt, kr, x, r))
        if r > max_ratio:
            max_ratio, argmax = r, (n, kt, kr, x)
        if progress and (i + 1) % 1000 == 0:
            progress(i + 1, n_samples)
    return GapReport(
        description=(
            f"seeded sample of {n_samples} tuples from N<={n_max}, "
            f"K_t<={kt_max}, K_r<={kr_max} (seed={seed})"
        ),
        n_tuples=n_samples,
        n_points=n_points,
        max_ratio=max_ratio,
        argmax=argmax,
        violations=violations,
    )


# ---------------------------------------------------------------------------
# The 2x2 interference-extraction curves


def _max_of_lines(m_rx, lines) -> Fraction:
    x = as_fraction(m_rx)
    if not 0 <= x <= 2:
        raise ValueError(f"m_rx={x} outside [0, 2]")
    return max(a + b * x for a, b in lines)


def dof_2x2_curve(m_rx) -> Fraction:
    """Reciprocal DoF of the 2x2 network with interference extraction."""
    return _max_of_lines(
        m_rx,
        [
            (Fraction(3, 2), Fraction(-3, 2)),
            (Fraction(9, 7), Fraction(-6, 7)),
            (Fraction(1), Fraction(-1, 2)),
        ],
    )


def dof_2x2_baseline(m_rx) -> Fraction:
    """Reciprocal DoF of the 2x2 network under the plain multicast interface."""
    return _max_of_lines(m_rx, [(Fraction(3, 2), Fraction(-1)), (Fraction(1), Fraction(-1, 2))])


def net2x2_lower_bound(m_rx) -> Fraction:
    """Sum-load lower bound for the interacting-pipe 2x2 separation architecture."""
    return _max_of_lines(
        m_rx,
        [
            (Fraction(2), Fraction(-2)),
            (Fraction(12, 7), Fraction(-8, 7)),
            (Fraction(4, 3), Fraction(-2, 3)),
        ],
    )


#: Achievable (m_rx, sum load) corners of the 2x2 interference-extraction scheme.
CORNERS_2X2 = (
    (Fraction(0), Fraction(2)),
    (Fraction(1, 3), Fraction(4, 3)),
    (Fraction(4, 5), Fraction(4, 5)),
    (Fraction(2), Fraction(0)),
)


def net2x2_achievable_load(m_rx) -> Fraction:
    """Achievable 2x2 sum load: piecewise-linear interpolation of the corners."""
    return lower_convex_envelope(CORNERS_2X2)(as_fraction(m_rx))
