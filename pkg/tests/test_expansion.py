"""Tests for the stochastic expansions."""
import itertools
import math
import numpy as np
import pytest
from basketexp.basket import BasketSpec, ProxyKind
from basketexp.black76 import black
from basketexp.exceptions import (
    ArgumentError, DegenerateProxyError, NumericalFailureError,
)
from basketexp.expansion import (
    accumulate, expand_price, pair_indices, parse_method, price_basket,
    symmetric_double_sum, symmetric_triple_sum, triple_indices,
)
from basketexp.reductions import asian_to_basket
from basketexp.tables import JU_WEEKLY, KREKEL_INHOM, KREKEL_RHO, KREKEL_VOL
from . import utils

METHODS = ["VG0", "VG1", "VG2", "VG3", "VL0", "VL1", "VL2", "VL3"]


@pytest.mark.parametrize("method", METHODS)
@pytest.mark.parametrize("eta", [1, -1])
def test_single_asset_is_black(method, eta):
    """Verify every correction vanishes for one asset."""
    spec = BasketSpec([1.0], [100.0], [[0.0625]], 95.0, 0.95, 1.0, eta)
    expected = float(black(100.0, 95.0, 0.0625, 1.0, 0.95, eta))
    assert price_basket(spec, method).price == \
        pytest.approx(expected, rel=1e-12)


def test_put_call_parity():
    """Verify C - P = B (A - K) on random baskets."""
    rng = np.random.default_rng(20240101)
    for _ in range(1000):
        call = utils.random_basket(rng)
        put = call.with_eta(-1)
        parity = call.discount * (call.basket_forward - call.strike)
        for method in ["VG2", "VG3", "VL3"]:
            difference = price_basket(call, method).price - \
                price_basket(put, method).price
            assert difference == pytest.approx(
                parity, rel=1e-12, abs=1e-12 * call.basket_forward)


def test_permutation_invariance():
    """Verify reordering the assets leaves prices unchanged."""
    rng = np.random.default_rng(7)
    for _ in range(20):
        spec = utils.random_basket(rng)
        order = rng.permutation(spec.size)
        permuted = BasketSpec(
            spec.weights[order], spec.forwards[order],
            spec.covariance[np.ix_(order, order)], spec.strike,
            spec.discount, spec.maturity, spec.eta,
        )
        for method in ["VG3", "VL3"]:
            assert price_basket(permuted, method).price == pytest.approx(
                price_basket(spec, method).price, rel=1e-12)


@pytest.mark.parametrize("method", ["VG1", "VG2", "VG3", "VL3"])
def test_price_scales_with_notional(method):
    """Verify (w, K) -> lambda (w, K) scales the price by lambda."""
    spec = utils.krekel_basket(rho=0.3)
    for scale in (1e-3, 3.7, 250.0):
        scaled = BasketSpec(spec.weights * scale, spec.forwards,
                            spec.covariance, spec.strike * scale,
                            spec.discount, spec.maturity)
        assert price_basket(scaled, method).price == pytest.approx(
            scale * price_basket(spec, method).price, rel=1e-12)


@pytest.mark.parametrize("method", ["VG2", "VG3", "VL3"])
def test_call_decreasing_in_strike(method):
    """Verify call prices do not increase with the strike."""
    prices = [
        price_basket(utils.krekel_basket(strike=strike), method).price
        for strike in np.arange(60.0, 165.0, 5.0)
    ]
    assert np.all(np.diff(prices) <= 1e-12)


def kernel(shift):
    """Return a smooth test kernel of the summed shifts."""
    return np.cos(shift) + shift * shift


@pytest.mark.parametrize("size", [1, 2, 3, 4])
def test_symmetric_sums_brute_force(size):
    """Verify the i <= j and i <= j <= l sums equal the full sums."""
    rng = np.random.default_rng(size)
    atilde = rng.uniform(-0.5, 1.0, size)
    vbar = rng.uniform(0.0, 0.3, size)
    factors = rng.normal(scale=0.3, size=(size, size))
    covariance = factors @ factors.T
    covariance = 0.5 * (covariance + covariance.T)

    double = math.fsum(
        atilde[i] * atilde[j] * math.exp(covariance[i, j])
        * kernel(vbar[i] + vbar[j])
        for i, j in itertools.product(range(size), repeat=2)
    )
    triple = math.fsum(
        atilde[i] * atilde[j] * atilde[k]
        * math.exp(covariance[i, k] + covariance[j, k] + covariance[i, j])
        * kernel(vbar[i] + vbar[j] + vbar[k])
        for i, j, k in itertools.product(range(size), repeat=3)
    )
    assert symmetric_double_sum(atilde, vbar, covariance, kernel) == \
        pytest.approx(double, rel=1e-13, abs=1e-15)
    assert symmetric_triple_sum(atilde, vbar, covariance, kernel) == \
        pytest.approx(triple, rel=1e-13, abs=1e-15)


@pytest.mark.parametrize("size", [1, 2, 5, 20])
def test_index_multiplicities(size):
    """Verify the multiplicities cover every ordered tuple once."""
    first, second, multiplicity = pair_indices(size)
    assert np.all(first <= second)
    assert multiplicity.sum() == size ** 2
    first, second, third, multiplicity = triple_indices(size)
    assert len(first) == math.comb(size + 2, 3)
    assert np.all((first <= second) & (second <= third))
    assert multiplicity.sum() == size ** 3


def test_accumulate():
    """Verify compensated summation of cancelling terms."""
    assert accumulate([1e16, 1.0, -1e16, 1.0]) == 2.0
    assert accumulate([]) == 0.0


@pytest.mark.parametrize("row", range(len(JU_WEEKLY.rows)))
def test_weekly_asian_table(row):
    """Verify the weekly 3 year Asian prices to the published 4 digits."""
    labels = JU_WEEKLY.rows[row].labels
    basket = asian_to_basket(utils.weekly_asian(labels["sigma"], labels["K"]))
    for method in ["VG1", "VG2", "VG3", "VL3"]:
        assert price_basket(basket, method).price == pytest.approx(
            JU_WEEKLY.references[method][row], abs=6e-5)


def test_weekly_asian_example():
    """Verify the (0.50, 105) row quoted as acceptance example."""
    basket = asian_to_basket(utils.weekly_asian(0.5, 105.0))
    assert price_basket(basket, "VG1").price == pytest.approx(20.7791,
                                                              abs=6e-5)
    assert price_basket(basket, "VG2").price == pytest.approx(20.8219,
                                                              abs=6e-5)
    assert price_basket(basket, "VG3").price == pytest.approx(20.8239,
                                                              abs=6e-5)
    assert price_basket(basket, "VL3").price == pytest.approx(20.8238,
                                                              abs=6e-5)


@pytest.mark.parametrize("table", [KREKEL_RHO, KREKEL_VOL, KREKEL_INHOM],
                         ids=lambda table: table.table_id)
def test_krekel_tables(table):
    """Verify the basket tables to the published 3 digits."""
    for row, table_row in enumerate(table.rows):
        overrides = table_row.overrides
        spec = utils.krekel_basket(
            sigma=overrides.get("volatilities", 0.4),
            rho=overrides.get("correlation", 0.5),
        )
        for method in table.methods:
            assert price_basket(spec, method).price == pytest.approx(
                table.references[method][row], abs=6e-4)


def test_krekel_divergence():
    """Verify the third order diverges at sigma = 100%."""
    spec = utils.krekel_basket(sigma=1.0)
    assert price_basket(spec, "VG3").price == pytest.approx(15.447, abs=6e-4)
    assert price_basket(spec, "VL3").price == pytest.approx(9.938, abs=6e-4)


def test_sanity_bound_warning(caplog):
    """Verify a large alpha exp(3 nu^2) is logged."""
    spec = utils.krekel_basket(sigma=1.0)
    price_basket(spec, "VG3")
    assert "may diverge" in caplog.text
    caplog.clear()
    price_basket(utils.krekel_basket(sigma=0.1), "VG3")
    assert "may diverge" not in caplog.text


def test_orders_converge():
    """Verify higher orders approach the accurate price for low variance."""
    spec = utils.krekel_basket(sigma=0.2, rho=0.5)
    errors = [
        abs(price_basket(spec, f"VG{order}").price - 14.083)
        for order in (1, 2)
    ]
    assert errors[0] > errors[1]


def test_deterministic_basket():
    """Verify a zero covariance basket prices at intrinsic value."""
    spec = BasketSpec([0.5, 0.5], [100.0, 110.0], np.zeros((2, 2)), 100.0,
                      0.9)
    assert expand_price(spec).price == pytest.approx(0.9 * 5.0)


def test_negative_normalized_strike():
    """Verify K* <= 0 short circuits to the forward value."""
    spec = utils.krekel_basket(strike=-5.0)
    result = expand_price(spec, ProxyKind.VORST_LEVY, 3)
    assert result.price == pytest.approx(105.0)
    assert result.diagnostics["Kstar"] < 0.0


def test_degenerate_proxy():
    """Verify nu^2 = 0 with a random basket is an error."""
    spec = BasketSpec([1.0, 1.0], [100.0, 100.0],
                      [[0.04, -0.04], [-0.04, 0.04]], 200.0)
    with pytest.raises(DegenerateProxyError):
        expand_price(spec, ProxyKind.VORST_GEOMETRIC, 2)


def test_numerical_failure(mocker):
    """Verify a non-finite term raises NumericalFailureError."""
    mocker.patch("basketexp.expansion.black_d3k",
                 return_value=np.array(float("nan")))
    spec = utils.krekel_basket()
    with pytest.raises(NumericalFailureError):
        expand_price(spec, ProxyKind.VORST_GEOMETRIC, 3)


def test_diagnostics():
    """Verify the diagnostics attached to a price."""
    spec = utils.krekel_basket()
    result = price_basket(spec, "VL2")
    assert result.diagnostics["A"] == pytest.approx(100.0)
    assert result.diagnostics["Kstar"] == pytest.approx(1.0)
    assert result.diagnostics["order"] == 2
    assert result.diagnostics["proxy"] == "VL"
    assert result.std_error is None


@pytest.mark.parametrize("label", ["VG4", "XX1", "VG", "MC", ""])
def test_bad_method(label):
    """Verify unknown method labels are rejected."""
    with pytest.raises(ArgumentError):
        parse_method(label)


def test_bad_order():
    """Verify the expansion order is 0..3."""
    with pytest.raises(ArgumentError):
        expand_price(utils.krekel_basket(), ProxyKind.VORST_GEOMETRIC, 4)
