"""
Black-76 formula and its strike derivatives.

Every function is vectorized over the forward: the expansion evaluates the
same strike and variance at many shifted forwards in a single call.
"""
import numpy as np
from scipy import special
from . import exceptions

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def norm_pdf(x):
    """Return the standard normal density."""
    return _INV_SQRT_2PI * np.exp(-0.5 * np.square(x))


def norm_cdf(x):
    """Return the standard normal distribution function."""
    return special.ndtr(x)


def _check(forward, strike, variance, eta):
    forward = np.asarray(forward, dtype=float)
    if np.any(~(forward > 0.0)):
        raise exceptions.ArgumentError("Black forward must be > 0")
    if not strike > 0.0:
        raise exceptions.ArgumentError(
            f"Black strike must be > 0, got {strike}"
        )
    if not variance >= 0.0:
        raise exceptions.ArgumentError(
            f"Black variance must be >= 0, got {variance}"
        )
    if eta not in (1, -1):
        raise exceptions.ArgumentError(f"eta must be +1 or -1, got {eta}")
    return forward


def _d2(forward, strike, variance):
    sqrt_v = np.sqrt(variance)
    return (np.log(forward / strike) - 0.5 * variance) / sqrt_v


def black(forward, strike, variance, maturity=None, discount=1.0, eta=1):
    """Return eta * B * (F Phi(eta d1) - K Phi(eta d2)).

    With zero variance the discounted intrinsic value is returned.
    """
    # pylint: disable=too-many-arguments,unused-argument
    forward = _check(forward, strike, variance, eta)
    if variance == 0.0:
        return discount * np.maximum(eta * (forward - strike), 0.0)
    d2 = _d2(forward, strike, variance)
    d1 = d2 + np.sqrt(variance)
    return eta * discount * (
        forward * norm_cdf(eta * d1) - strike * norm_cdf(eta * d2)
    )


def black_dk(forward, strike, variance, maturity=None, discount=1.0, eta=1):
    """Return the first strike derivative -eta * B * Phi(eta d2)."""
    # pylint: disable=too-many-arguments,unused-argument
    forward = _check(forward, strike, variance, eta)
    if variance == 0.0:
        # Digital at zero variance, half weight exactly at the money
        itm = np.heaviside(eta * (forward - strike), 0.5)
        return -eta * discount * itm
    return -eta * discount * norm_cdf(eta * _d2(forward, strike, variance))


def black_d2k(forward, strike, variance, maturity=None, discount=1.0, eta=1):
    """Return the second strike derivative B phi(d2) / (K sqrt(v))."""
    # pylint: disable=too-many-arguments,unused-argument
    forward = _check(forward, strike, variance, eta)
    if variance == 0.0:
        raise exceptions.DerivativeUndefinedError(
            "second strike derivative undefined at zero variance"
        )
    sqrt_v = np.sqrt(variance)
    d2 = _d2(forward, strike, variance)
    return discount * norm_pdf(d2) / (strike * sqrt_v)


def black_d3k(forward, strike, variance, maturity=None, discount=1.0, eta=1):
    """Return the third strike derivative.

    B phi(d2) / (K^2 sqrt(v)) * (d2 / sqrt(v) - 1), the analytic derivative
    of black_d2k().
    """
    # pylint: disable=too-many-arguments,unused-argument
    forward = _check(forward, strike, variance, eta)
    if variance == 0.0:
        raise exceptions.DerivativeUndefinedError(
            "third strike derivative undefined at zero variance"
        )
    sqrt_v = np.sqrt(variance)
    d2 = _d2(forward, strike, variance)
    return (
        discount * norm_pdf(d2) / (strike * strike * sqrt_v)
        * (d2 / sqrt_v - 1.0)
    )
