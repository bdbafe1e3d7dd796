"""Tests for the Monte Carlo reference pricer."""
import numpy as np
import pytest
from basketexp import (
    BasketSpec, McConfig, asian_to_basket, factor_psd, price_basket, price_mc,
)
from basketexp.black76 import black
from basketexp.exceptions import ArgumentError, FactorizationError
from basketexp.montecarlo import price_mc_strikes, simulate_normalized
from . import utils


def single_asset(eta=1):
    """Return a one asset basket with total variance 0.04."""
    return BasketSpec([1.0], [100.0], [[0.04]], 105.0, 0.95, 1.0, eta)


def black_price(eta=1):
    """Return the Black price of single_asset()."""
    return float(black(100.0, 105.0, 0.04, 1.0, 0.95, eta))


def test_factor_identity():
    """Verify the factor of a definite matrix is its Cholesky factor."""
    factor = factor_psd(np.eye(3))
    np.testing.assert_allclose(factor, np.eye(3))


def test_factor_min_structure():
    """Verify L L^T = V for an Asian covariance."""
    variances = 0.09 * np.linspace(0.1, 3.0, 30)
    covariance = np.minimum.outer(variances, variances)
    factor = factor_psd(covariance)
    np.testing.assert_allclose(factor @ factor.T, covariance, atol=1e-12)


def test_factor_rank_one():
    """Verify a rank one matrix has a single column factor."""
    vector = np.array([0.1, 0.2, 0.3])
    covariance = np.outer(vector, vector)
    factor = factor_psd(covariance)
    assert factor.shape == (3, 1)
    np.testing.assert_allclose(factor @ factor.T, covariance, atol=1e-14)


def test_factor_zero():
    """Verify the zero matrix has no factor columns."""
    assert factor_psd(np.zeros((2, 2))).shape == (2, 0)


def test_factor_indefinite():
    """Verify an indefinite matrix is rejected."""
    with pytest.raises(FactorizationError):
        factor_psd([[1.0, 2.0], [2.0, 1.0]])


def test_factor_asymmetric():
    """Verify an asymmetric matrix is rejected."""
    with pytest.raises(ArgumentError):
        factor_psd([[1.0, 0.5], [0.2, 1.0]])


def test_deterministic_basket():
    """Verify V = 0 gives the intrinsic value with zero error."""
    spec = BasketSpec([0.5, 0.5], [100.0, 120.0], np.zeros((2, 2)), 100.0,
                      0.9)
    result = price_mc(spec, McConfig(paths=1000, seed=3))
    assert result.price == pytest.approx(9.0)
    assert result.std_error == 0.0


@pytest.mark.parametrize("eta", [1, -1])
def test_single_asset_black(eta):
    """Verify the estimate is within 4 standard errors of Black."""
    result = price_mc(single_asset(eta), McConfig(paths=200000, seed=1))
    assert result.std_error > 0.0
    assert abs(result.price - black_price(eta)) < 4 * result.std_error
    assert result.diagnostics["paths"] == 200000
    assert result.diagnostics["sampler"] == "pseudorandom"


def test_krekel_basket():
    """Verify the four asset basket against its published MC price."""
    result = price_mc(utils.krekel_basket(),
                      McConfig(paths=200000, seed=2))
    assert abs(result.price - 28.007) < 4 * result.std_error + 0.01


def test_reproducible():
    """Verify the same seed gives the same price."""
    cfg = McConfig(paths=50000, seed=11, block_size=4096)
    spec = utils.krekel_basket()
    assert price_mc(spec, cfg) == price_mc(spec, cfg)
    assert price_mc(spec, cfg).price != \
        price_mc(spec, cfg._replace(seed=12)).price


def test_workers_independent():
    """Verify the estimate does not depend on the number of workers."""
    spec = utils.krekel_basket()
    cfg = McConfig(paths=50000, seed=5, block_size=4096)
    single = price_mc(spec, cfg._replace(workers=1))
    threaded = price_mc(spec, cfg._replace(workers=4))
    assert single.price == threaded.price
    assert single.std_error == threaded.std_error


def test_normalized_martingale():
    """Verify each normalized terminal value has mean one."""
    spec = utils.krekel_basket()
    values = simulate_normalized(spec, McConfig(paths=100000, seed=9))
    assert values.shape == (100000, 4)
    error = values.std(axis=0, ddof=1) / np.sqrt(values.shape[0])
    assert np.all(np.abs(values.mean(axis=0) - 1.0) < 5 * error)


def test_normalized_antithetic_pairs():
    """Verify antithetic draws come in mirrored pairs."""
    spec = single_asset()
    values = simulate_normalized(
        spec, McConfig(paths=1000, seed=4, antithetic=True, block_size=1000))
    half = values.shape[0] // 2
    # ln S* = -V/2 + z and ln S*' = -V/2 - z
    np.testing.assert_allclose(
        np.log(values[:half]) + np.log(values[half:]), -0.04, atol=1e-12)


def test_antithetic():
    """Verify antithetic pricing is unbiased with a smaller error."""
    spec = single_asset()
    plain = price_mc(spec, McConfig(paths=100000, seed=6))
    paired = price_mc(spec, McConfig(paths=100000, seed=6, antithetic=True))
    assert paired.diagnostics["antithetic"]
    assert abs(paired.price - black_price()) < 4 * paired.std_error
    assert paired.std_error < plain.std_error


def test_antithetic_odd_block():
    """Verify odd block lengths are rounded up to whole pairs."""
    spec = single_asset()
    result = price_mc(spec, McConfig(paths=1001, seed=6, antithetic=True,
                                     block_size=500))
    assert result.diagnostics["paths"] == 1002
    assert result.diagnostics["blocks"] == 3


def test_sobol():
    """Verify scrambled Sobol replicates price within their error."""
    spec = single_asset()
    result = price_mc(spec, McConfig(paths=2 ** 16, seed=8, sampler="sobol",
                                     block_size=2 ** 13))
    assert result.diagnostics["sampler"] == "sobol"
    assert result.diagnostics["blocks"] == 8
    assert abs(result.price - black_price()) < 5 * result.std_error + 1e-3


def test_sobol_two_replicates():
    """Verify Sobol uses at least two replicates."""
    result = price_mc(single_asset(), McConfig(paths=1024, seed=8,
                                               sampler="sobol"))
    assert result.diagnostics["blocks"] == 2
    assert result.std_error > 0.0


def test_sobol_power_of_two_blocks():
    """Verify Sobol replicates hold a power of two points each."""
    result = price_mc(single_asset(), McConfig(paths=100000, seed=8,
                                               sampler="sobol"))
    assert result.diagnostics["blocks"] == 13
    assert result.diagnostics["paths"] == 13 * 8192
    result = price_mc(single_asset(), McConfig(
        paths=20000, seed=8, sampler="sobol", block_size=5000))
    assert result.diagnostics["blocks"] == 5
    assert result.diagnostics["paths"] == 5 * 4096


def test_sobol_fallback(caplog):
    """Verify too many dimensions fall back to pseudorandom draws."""
    cfg = McConfig(paths=1000, seed=1, sampler="sobol", max_qmc_dimension=2)
    result = price_mc(utils.krekel_basket(), cfg)
    assert result.diagnostics["sampler"] == "pseudorandom"
    assert "falling back" in caplog.text


def test_strikes_common_draws():
    """Verify several strikes are priced on the same draws."""
    spec = utils.krekel_basket()
    cfg = McConfig(paths=20000, seed=13)
    results = price_mc_strikes(spec, [90.0, 100.0, 110.0], cfg)
    prices = [result.price for result in results]
    assert prices[0] > prices[1] > prices[2]
    assert prices[1] == pytest.approx(price_mc(spec, cfg).price, rel=1e-12)


@pytest.mark.parametrize("cfg", [
    McConfig(paths=1),
    McConfig(paths=1000.0),
    McConfig(paths=1000, sampler="halton"),
    McConfig(paths=1000, block_size=1),
    McConfig(paths=1000, workers=0),
    McConfig(paths=1000, seed=-1),
])
def test_bad_config(cfg):
    """Verify unusable configurations are rejected."""
    with pytest.raises(ArgumentError):
        price_mc(single_asset(), cfg)


def test_weekly_asian_against_expansion():
    """Verify MC agrees with VG3 on a 157 date Asian."""
    basket = asian_to_basket(utils.weekly_asian(0.3, 100.0))
    result = price_mc(basket, McConfig(paths=100000, seed=17))
    expansion = price_basket(basket, "VG3").price
    assert abs(result.price - expansion) < 4 * result.std_error
    assert result.diagnostics["dimension"] == 156


@pytest.mark.parametrize("sigma", [0.05, 0.10, 0.20, 0.30])
def test_weekly_asian_table_against_mc(sigma):
    """Verify VG3 is within the MC error on the weekly Asian rows."""
    baskets = [
        asian_to_basket(utils.weekly_asian(sigma, strike))
        for strike in (95.0, 100.0, 105.0)
    ]
    results = price_mc_strikes(
        baskets[0], [basket.strike for basket in baskets],
        McConfig(paths=10 ** 6, seed=23),
    )
    for basket, result in zip(baskets, results):
        expansion = price_basket(basket, "VG3").price
        assert abs(result.price - expansion) < 4 * result.std_error


def test_error_halves_with_four_times_paths():
    """Verify the standard error shrinks as 1 / sqrt(paths)."""
    small = price_mc(single_asset(), McConfig(paths=40000, seed=31))
    large = price_mc(single_asset(), McConfig(paths=160000, seed=32))
    assert 1.8 < small.std_error / large.std_error < 2.2


def test_price_scales_with_notional():
    """Verify scaling weights and strike scales the price on equal draws."""
    spec = utils.krekel_basket(rho=0.3)
    scale = 3.7
    scaled = BasketSpec(spec.weights * scale, spec.forwards, spec.covariance,
                        spec.strike * scale, spec.discount, spec.maturity)
    cfg = McConfig(paths=20000, seed=5)
    base, result = price_mc(spec, cfg), price_mc(scaled, cfg)
    assert result.price == pytest.approx(scale * base.price, rel=1e-12)
    assert result.std_error == pytest.approx(scale * base.std_error,
                                             rel=1e-10)
