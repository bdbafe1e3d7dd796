"""Tests for piecewise-constant curves."""
import math
import pytest
from basketexp.curves import (
    PiecewiseCurve, discount, forward, growth, integrate, integrate_product,
    volatility_curve,
)
from basketexp.exceptions import ArgumentError


def test_constant():
    """Verify a constant curve integrates to value * length."""
    curve = PiecewiseCurve.constant(0.3)
    assert curve(0.0) == 0.3
    assert curve(100.0) == 0.3
    assert integrate(curve, 0.0, 2.0) == pytest.approx(0.6, rel=1e-15)


def test_right_open_segments():
    """Verify a breakpoint belongs to the segment on its right."""
    curve = PiecewiseCurve([1.0, 2.0], [0.1, 0.2, 0.3])
    assert curve(0.5) == 0.1
    assert curve(1.0) == 0.2
    assert curve(1.999) == 0.2
    assert curve(2.0) == 0.3
    assert curve(10.0) == 0.3


def test_integrate_across_breakpoints():
    """Verify exact integrals over partial segments."""
    curve = PiecewiseCurve([1.0], [0.1, 0.2])
    assert integrate(curve, 0.0, 3.0) == pytest.approx(0.5, rel=1e-15)
    assert integrate(curve, 0.5, 1.5) == pytest.approx(0.15, rel=1e-15)
    assert integrate(curve, 2.0, 2.0) == 0.0


def test_integrate_product():
    """Verify the integrated variance of a piecewise volatility."""
    sigma = PiecewiseCurve([1.0], [0.2, 0.3])
    assert integrate_product(sigma, sigma, 0.0, 2.0) == \
        pytest.approx(0.04 + 0.09, rel=1e-14)
    other = PiecewiseCurve([0.5], [1.0, 2.0])
    # [0, 0.5]: 0.2, [0.5, 1]: 0.4, [1, 2]: 0.6
    assert integrate_product(sigma, other, 0.0, 2.0) == \
        pytest.approx(0.1 + 0.2 + 0.6, rel=1e-14)


def test_reversed_bounds():
    """Verify integration bounds must be ordered."""
    with pytest.raises(ArgumentError):
        integrate(PiecewiseCurve.constant(1.0), 2.0, 1.0)


def test_bad_breakpoints():
    """Verify invalid curves are rejected."""
    with pytest.raises(ArgumentError):
        PiecewiseCurve([1.0, 1.0], [0.1, 0.2, 0.3])
    with pytest.raises(ArgumentError):
        PiecewiseCurve([2.0, 1.0], [0.1, 0.2, 0.3])
    with pytest.raises(ArgumentError):
        PiecewiseCurve([1.0], [0.1])
    with pytest.raises(ArgumentError):
        PiecewiseCurve([1.0], [0.1, float("nan")])


def test_negative_volatility():
    """Verify a volatility curve must be non-negative."""
    assert volatility_curve(0.2) == PiecewiseCurve.constant(0.2)
    with pytest.raises(ArgumentError):
        volatility_curve(PiecewiseCurve([1.0], [0.2, -0.1]))


def test_forward_and_discount():
    """Verify forward prices and discount factors of flat curves."""
    rate = PiecewiseCurve.constant(0.05)
    dividend_yield = PiecewiseCurve.constant(0.01)
    assert forward(100.0, rate, dividend_yield, 2.0) == \
        pytest.approx(100.0 * math.exp(0.08), rel=1e-14)
    assert discount(rate, 2.0) == pytest.approx(math.exp(-0.1), rel=1e-14)
    assert forward(100.0, rate, dividend_yield, 0.0) == 100.0


def test_growth_multiplicative():
    """Verify growth factors compose over adjacent intervals."""
    rate = PiecewiseCurve([0.5, 2.0], [0.01, 0.03, 0.02])
    dividend_yield = PiecewiseCurve([1.0], [0.0, 0.015])
    whole = growth(rate, dividend_yield, 0.0, 3.0)
    parts = growth(rate, dividend_yield, 0.0, 1.2) * \
        growth(rate, dividend_yield, 1.2, 3.0)
    assert parts == pytest.approx(whole, rel=1e-14)


def test_forward_bad_inputs():
    """Verify forward() rejects a non-positive spot and negative time."""
    rate = PiecewiseCurve.constant(0.05)
    with pytest.raises(ArgumentError):
        forward(0.0, rate, rate, 1.0)
    with pytest.raises(ArgumentError):
        forward(100.0, rate, rate, -1.0)
