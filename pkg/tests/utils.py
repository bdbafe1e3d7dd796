"""Utilities common to multiple tests."""

from pathlib import Path
import numpy as np
from basketexp import AsianSpec, BasketSpec


# Directories containing test input files
TESTDIR = Path(__file__).resolve().parent


def weekly_asian(sigma, strike, fold_past_fixings=False):
    """Return the 3 year weekly averaging call, 157 dates from today."""
    return AsianSpec(
        spot=100.0, rate=0.09, yield_curve=0.0, volatility=sigma,
        times=np.linspace(0.0, 3.0, 157), strike=strike,
        fold_past_fixings=fold_past_fixings,
    )


def krekel_basket(sigma=0.4, rho=0.5, strike=100.0):
    """Return the four asset basket call, T = 5, spots 100, r = 0."""
    if np.isscalar(sigma):
        sigma = [sigma] * 4
    return BasketSpec.from_market(
        weights=[0.25] * 4, forwards=[100.0] * 4, volatilities=sigma,
        correlation=rho, maturity=5.0, strike=strike,
    )


def random_basket(rng, eta=1):
    """Return a random basket of 2 to 5 assets with moderate variance."""
    size = int(rng.integers(2, 6))
    factors = rng.normal(size=(size, size))
    correlation = factors @ factors.T
    scale = np.sqrt(np.diag(correlation))
    correlation = correlation / np.outer(scale, scale)
    np.fill_diagonal(correlation, 1.0)
    weights = rng.uniform(0.1, 1.0, size)
    forwards = rng.uniform(50.0, 150.0, size)
    maturity = rng.uniform(0.5, 3.0)
    strike = rng.uniform(0.7, 1.3) * float(weights @ forwards)
    return BasketSpec.from_market(
        weights, forwards, rng.uniform(0.1, 0.5, size), correlation,
        maturity, strike, discount=float(np.exp(-0.03 * maturity)), eta=eta,
    )
