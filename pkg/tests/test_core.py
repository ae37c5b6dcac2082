from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cachedof.core import (
    PiecewiseLinear,
    SystemParams,
    as_fraction,
    lower_convex_envelope,
    subsets_of_size,
    validate_subset,
)


def test_as_fraction_coercions():
    assert as_fraction(3) == Fraction(3)
    assert as_fraction("7/4") == Fraction(7, 4)
    assert as_fraction(Fraction(1, 3)) == Fraction(1, 3)
    import gmpy2

    assert as_fraction(gmpy2.mpq(5, 6)) == Fraction(5, 6)
    with pytest.raises(TypeError):
        as_fraction(0.5)


class TestSystemParams:
    def test_kappa_and_sigma(self):
        p = SystemParams(4, 2, 4, 2, 1)
        assert p.kappa == 1
        assert p.kappa_int == 1
        assert p.sigma == 2

    def test_fractional_kappa_rejected_as_int(self):
        p = SystemParams(4, 2, 4, 2, Fraction(1, 2))
        assert p.kappa == Fraction(1, 2)
        with pytest.raises(ValueError, match="corner grid"):
            p.kappa_int

    def test_mr_range(self):
        with pytest.raises(ValueError):
            SystemParams(4, 2, 4, 2, 5)
        with pytest.raises(ValueError):
            SystemParams(4, 2, 4, 2, -1)

    def test_tx_caches_must_cover_library(self):
        with pytest.raises(ValueError, match="collectively"):
            SystemParams(4, 2, 4, 1, 0)

    def test_with_m_rx(self):
        p = SystemParams(4, 2, 4, 2, 0)
        assert p.with_m_rx(2).kappa_int == 2


def test_subsets_lexicographic():
    assert subsets_of_size(3, 2) == [(1, 2), (1, 3), (2, 3)]
    assert subsets_of_size(4, 0) == [()]
    assert subsets_of_size(2, 2) == [(1, 2)]
    with pytest.raises(ValueError):
        subsets_of_size(3, 4)


def test_validate_subset():
    assert validate_subset([3, 1], 4) == (1, 3)
    with pytest.raises(ValueError):
        validate_subset([1, 1], 4)
    with pytest.raises(ValueError):
        validate_subset([0, 2], 4)


class TestPiecewiseLinear:
    def test_eval_and_interp(self):
        f = PiecewiseLinear(((Fraction(0), Fraction(2)), (Fraction(2), Fraction(0))))
        assert f(0) == 2
        assert f(1) == 1
        assert f(2) == 0
        with pytest.raises(ValueError):
            f(3)

    def test_monotone_x_required(self):
        with pytest.raises(ValueError):
            PiecewiseLinear(((Fraction(1), Fraction(0)), (Fraction(1), Fraction(1))))

    def test_convexity_flag(self):
        f = PiecewiseLinear(
            ((Fraction(0), Fraction(2)), (Fraction(1), Fraction(1)), (Fraction(2), Fraction(1)))
        )
        assert f.is_convex()


fracs = st.fractions(min_value=-20, max_value=20, max_denominator=8)


@settings(deadline=None, max_examples=150)
@given(st.lists(st.tuples(fracs, fracs), min_size=2, max_size=12))
def test_envelope_lies_below_points_and_is_convex(points):
    xs = {x for x, _ in points}
    if len(xs) < 2 or len(xs) != len(points):
        points = [(x, min(y for a, y in points if a == x)) for x in xs]
        if len(points) < 2:
            return
    env = lower_convex_envelope(points)
    assert env.is_convex()
    for x, y in points:
        assert env(x) <= y
    # breakpoints are a subset of the input point set
    assert set(env.breakpoints) <= set(points)


def test_envelope_drops_collinear_points():
    env = lower_convex_envelope([(0, 0), (1, 1), (2, 2)])
    assert len(env.breakpoints) == 2
