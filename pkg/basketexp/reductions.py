"""
Reductions of Asian, Asian basket and cash dividend options to baskets.

Under Black-Scholes dynamics with term structures, each instrument's payoff
is a weighted sum of jointly lognormal variables at the payment date, which
is exactly a BasketSpec.
"""
import dataclasses
import functools
import logging
import math
import numpy as np
from . import exceptions
from .basket import BasketSpec
from .curves import (
    PiecewiseCurve, discount, forward, growth, integrate_product,
    volatility_curve,
)

logger = logging.getLogger(__name__)


def _curve(value):
    if isinstance(value, PiecewiseCurve):
        return value
    return PiecewiseCurve.constant(value)


def _vector(values, name):
    try:
        array = np.array(values, dtype=float).ravel()
    except (TypeError, ValueError) as err:
        raise exceptions.ArgumentError(f"{name}: {err}") from err
    if not np.all(np.isfinite(array)):
        raise exceptions.ArgumentError(f"{name} must be finite")
    return array


def _observations(times, weights):
    times = _vector(times, "times")
    if times.size == 0:
        raise exceptions.ArgumentError("at least one observation is required")
    if np.any(np.diff(times) <= 0.0):
        raise exceptions.ArgumentError(
            "observation times must be strictly increasing"
        )
    if weights is None:
        weights = np.full(times.size, 1.0 / times.size)
    weights = _vector(weights, "weights")
    if weights.shape != times.shape:
        raise exceptions.ArgumentError(
            f"expected {times.size} averaging weights, got {weights.size}"
        )
    return times, weights


def _past_observations(spec, spot_fixing):
    """Split the observations at t <= 0 off an Asian spec.

    Returns (first future index, strike adjustment, fixed weights, fixed
    values).  Folded fixings are subtracted from the strike, otherwise each
    one stays in the basket as a deterministic asset.  An observation at
    exactly t = 0 defaults to spot_fixing.
    """
    times, weights = spec.times, spec.weights
    past = int(np.searchsorted(times, 0.0, side="right"))
    fixings = [] if spec.fixings is None else [float(f) for f in spec.fixings]
    if len(fixings) > past:
        raise exceptions.ArgumentError(
            f"{len(fixings)} fixings given for {past} past observations"
        )
    if len(fixings) < past:
        if len(fixings) == past - 1 and times[past - 1] == 0.0:
            fixings.append(spot_fixing)
        else:
            raise exceptions.ArgumentError(
                f"missing fixing for observation at t = "
                f"{times[len(fixings)]}"
            )
    if not spec.fold_past_fixings:
        return past, 0.0, weights[:past], np.array(fixings, dtype=float)
    if past == times.size:
        raise exceptions.ReductionError(
            "every observation is fixed, nothing left to price"
        )
    known = math.fsum(w * f for w, f in zip(weights[:past], fixings))
    return past, known, np.empty(0), np.empty(0)


def _prepend_fixed(weights, forwards, covariance, fixed_weights,
                   fixed_values):
    """Return the basket arrays with deterministic assets in front."""
    count = fixed_weights.size
    return (
        np.concatenate([fixed_weights, weights]),
        np.concatenate([fixed_values, forwards]),
        np.pad(covariance, ((count, 0), (count, 0))),
    )


@dataclasses.dataclass(frozen=True, eq=False)
class AsianSpec:
    """Discretely averaged arithmetic Asian option on one asset.

    Pays [eta (sum_i w_i S(t_i) - K)]^+ at the last observation t_n = T.
    fixings are the known values of the observations with t_i <= 0, in order.
    With fold_past_fixings they are subtracted from the strike, otherwise
    each stays in the basket as an asset of zero variance.
    """

    # pylint: disable=too-many-instance-attributes

    spot: float
    rate: PiecewiseCurve
    yield_curve: PiecewiseCurve
    volatility: PiecewiseCurve
    times: tuple
    strike: float
    weights: tuple = None
    eta: int = 1
    payment_discount: float = None
    fixings: tuple = None
    fold_past_fixings: bool = True

    def __post_init__(self):
        """Coerce curves and observations."""
        times, weights = _observations(self.times, self.weights)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "rate", _curve(self.rate))
        object.__setattr__(self, "yield_curve", _curve(self.yield_curve))
        object.__setattr__(self, "volatility",
                           volatility_curve(self.volatility))
        if not self.spot > 0.0:
            raise exceptions.ArgumentError(
                f"spot must be > 0, got {self.spot}"
            )
        if not self.times[-1] > 0.0:
            raise exceptions.ArgumentError("maturity must be > 0")

    @property
    def maturity(self):
        """Return the last observation time."""
        return float(self.times[-1])

    def forwards(self):
        """Return F(0, t_i) for each observation, spot for t_i <= 0."""
        return np.array([
            forward(self.spot, self.rate, self.yield_curve, max(t, 0.0))
            for t in self.times
        ])

    def expected_average(self):
        """Return sum_i w_i F(0, t_i), the moneyness denominator."""
        return math.fsum(self.weights * self.forwards())

    def notional(self):
        """Return the spot, the unit of basis point errors."""
        return float(self.spot)


def asian_to_basket(spec):
    """Return the BasketSpec equivalent to an AsianSpec.

    Pseudo asset i has forward F(0, t_i) and integrated covariance
    V_ij = v_min(i,j) with v_i = int_0^t_i sigma^2.
    """
    past, known, fixed_weights, fixed_values = _past_observations(
        spec, spec.spot)
    times = spec.times[past:]
    variances = np.array([
        integrate_product(spec.volatility, spec.volatility, 0.0, t)
        for t in times
    ])
    covariance = np.minimum.outer(variances, variances)
    forwards = np.array([
        forward(spec.spot, spec.rate, spec.yield_curve, t) for t in times
    ])
    weights, forwards, covariance = _prepend_fixed(
        spec.weights[past:], forwards, covariance, fixed_weights,
        fixed_values,
    )
    payment_discount = spec.payment_discount
    if payment_discount is None:
        payment_discount = discount(spec.rate, spec.maturity)
    return BasketSpec(
        weights=weights,
        forwards=forwards,
        covariance=covariance,
        strike=spec.strike - known,
        discount=payment_discount,
        maturity=spec.maturity,
        eta=spec.eta,
    )


@dataclasses.dataclass(frozen=True)
class AssetSpec:
    """One underlying of an Asian basket."""

    spot: float
    yield_curve: PiecewiseCurve = 0.0
    volatility: PiecewiseCurve = 0.0

    def __post_init__(self):
        """Coerce curves."""
        if not self.spot > 0.0:
            raise exceptions.ArgumentError(
                f"spot must be > 0, got {self.spot}"
            )
        object.__setattr__(self, "yield_curve", _curve(self.yield_curve))
        object.__setattr__(self, "volatility",
                           volatility_curve(self.volatility))


@dataclasses.dataclass(frozen=True, eq=False)
class AsianBasketSpec:
    """Asian option on a basket of m assets.

    Pays [eta (sum_i w_i sum_j mu_j S_j(t_i) - K)]^+ at T = t_n.  fixings are
    the known basket values sum_j mu_j S_j(t_i) for t_i <= 0, handled as in
    AsianSpec.
    """

    # pylint: disable=too-many-instance-attributes

    assets: tuple
    rate: PiecewiseCurve
    correlation: np.ndarray
    basket_weights: tuple
    times: tuple
    strike: float
    weights: tuple = None
    eta: int = 1
    payment_discount: float = None
    fixings: tuple = None
    fold_past_fixings: bool = True

    def __post_init__(self):
        """Coerce inputs and check the correlation matrix."""
        assets = tuple(
            asset if isinstance(asset, AssetSpec) else AssetSpec(**asset)
            for asset in self.assets
        )
        times, weights = _observations(self.times, self.weights)
        size = len(assets)
        basket_weights = _vector(self.basket_weights, "basket_weights")
        if size == 0 or basket_weights.shape != (size,):
            raise exceptions.ArgumentError(
                f"expected {size} basket weights, got {basket_weights.size}"
            )
        correlation = np.array(self.correlation, dtype=float)
        if correlation.ndim == 0:
            correlation = np.full((size, size), float(correlation))
            np.fill_diagonal(correlation, 1.0)
        if correlation.shape != (size, size):
            raise exceptions.ArgumentError(
                f"expected {size}x{size} correlation, "
                f"got shape {correlation.shape}"
            )
        if (np.max(np.abs(correlation - correlation.T)) > 1e-12
                or np.any(np.abs(np.diag(correlation) - 1.0) > 1e-12)):
            raise exceptions.ArgumentError(
                "correlation must be symmetric with unit diagonal"
            )
        if np.linalg.eigvalsh(correlation)[0] < -1e-12:
            raise exceptions.ArgumentError(
                "correlation is not positive semidefinite"
            )
        if not times[-1] > 0.0:
            raise exceptions.ArgumentError("maturity must be > 0")
        object.__setattr__(self, "assets", assets)
        object.__setattr__(self, "rate", _curve(self.rate))
        object.__setattr__(self, "correlation", correlation)
        object.__setattr__(self, "basket_weights", basket_weights)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "weights", weights)

    @property
    def maturity(self):
        """Return the last observation time."""
        return float(self.times[-1])

    def forwards(self):
        """Return the m x n matrix F_j(0, t_i)."""
        return np.array([
            [forward(asset.spot, self.rate, asset.yield_curve, max(t, 0.0))
             for t in self.times]
            for asset in self.assets
        ])

    def expected_average(self):
        """Return sum_i sum_j w_i mu_j F_j(0, t_i)."""
        return math.fsum(
            (np.outer(self.basket_weights, self.weights)
             * self.forwards()).ravel()
        )

    def notional(self):
        """Return sum_j mu_j S_j(0), the unit of basis point errors."""
        return math.fsum(
            mu * asset.spot
            for mu, asset in zip(self.basket_weights, self.assets)
        )


def asian_basket_to_basket(spec):
    """Return the BasketSpec of n x m pseudo assets of an AsianBasketSpec.

    Pseudo asset i + n j (zero based) is asset j observed at t_i, with weight
    w_i mu_j and integrated covariance
    rho_jl int_0^min(t_i, t_k) sigma_j sigma_l with pseudo asset k + n l.
    Unfolded fixings come first as deterministic assets.
    """
    past, known, fixed_weights, fixed_values = _past_observations(
        spec, spec.notional())
    times = spec.times[past:]
    size = times.size
    count = len(spec.assets)
    # cumulative[j, l, i] = int_0^t_i sigma_j sigma_l
    cumulative = np.array([
        [[integrate_product(asset_j.volatility, asset_l.volatility, 0.0, t)
          for t in times]
         for asset_l in spec.assets]
        for asset_j in spec.assets
    ])
    first = np.minimum.outer(np.arange(size), np.arange(size))
    covariance = np.empty((count, size, count, size))
    for row in range(count):
        for column in range(count):
            covariance[row, :, column, :] = (
                spec.correlation[row, column]
                * cumulative[row, column][first]
            )
    covariance = covariance.reshape(count * size, count * size)
    forwards = spec.forwards()[:, past:].reshape(count * size)
    weights = np.outer(spec.basket_weights, spec.weights[past:]).reshape(
        count * size)
    weights, forwards, covariance = _prepend_fixed(
        weights, forwards, covariance, fixed_weights, fixed_values,
    )
    payment_discount = spec.payment_discount
    if payment_discount is None:
        payment_discount = discount(spec.rate, spec.maturity)
    return BasketSpec(
        weights=weights,
        forwards=forwards,
        covariance=covariance,
        strike=spec.strike - known,
        discount=payment_discount,
        maturity=spec.maturity,
        eta=spec.eta,
    )


@dataclasses.dataclass(frozen=True, eq=False)
class DividendOptionSpec:
    """European option on an asset paying cash dividends.

    Between ex-dividend dates the asset is lognormal, at each ex-date t_j it
    drops by the cash amount D_j.
    """

    # pylint: disable=too-many-instance-attributes

    spot: float
    rate: PiecewiseCurve
    volatility: PiecewiseCurve
    dividends: tuple
    strike: float
    maturity: float
    eta: int = 1
    yield_curve: PiecewiseCurve = 0.0

    def __post_init__(self):
        """Coerce curves and check the dividend schedule."""
        object.__setattr__(self, "rate", _curve(self.rate))
        object.__setattr__(self, "yield_curve", _curve(self.yield_curve))
        object.__setattr__(self, "volatility",
                           volatility_curve(self.volatility))
        if not self.spot > 0.0:
            raise exceptions.ArgumentError(
                f"spot must be > 0, got {self.spot}"
            )
        if not self.maturity > 0.0:
            raise exceptions.ArgumentError("maturity must be > 0")
        dividends = tuple(
            (float(time), float(amount)) for time, amount in self.dividends
        )
        for time, amount in dividends:
            if not 0.0 < time < self.maturity:
                raise exceptions.ReductionError(
                    f"dividend time {time} outside (0, {self.maturity})"
                )
            if not amount >= 0.0:
                raise exceptions.ArgumentError(
                    f"dividend amount must be >= 0, got {amount}"
                )
        if any(b[0] <= a[0] for a, b in zip(dividends, dividends[1:])):
            raise exceptions.ArgumentError(
                "dividend times must be strictly increasing"
            )
        object.__setattr__(self, "dividends", dividends)

    def notional(self):
        """Return the spot, the unit of basis point errors."""
        return float(self.spot)

    def paid_dividends(self):
        """Return [(t_j, D_j)] of the non-zero dividends."""
        return [(time, amount) for time, amount in self.dividends if amount]

    def forward_value(self):
        """Return E[S(T)], the forward net of the dividends.

        Raises ReductionError when the dividends exceed the forward.
        """
        value = forward(self.spot, self.rate, self.yield_curve, self.maturity)
        value -= math.fsum(
            amount * growth(self.rate, self.yield_curve, time, self.maturity)
            for time, amount in self.paid_dividends()
        )
        if not value > 0.0:
            raise exceptions.ReductionError(
                f"dividends exceed the forward, E[S(T)] = {value}"
            )
        return value


def dividends_to_spread_basket(spec):
    """Return the cash dividend option as a long-short basket.

    S(T) = S(0) M(0, T) - sum_j D_j M(t_j, T) where M(s, T) is the lognormal
    growth from s to T: one long asset anchored at 0 and one short asset per
    dividend.  Assets anchored at s and u share the Brownian increments after
    max(s, u), so their integrated covariance is int_max(s,u)^T sigma^2.
    """
    spec.forward_value()
    maturity = spec.maturity
    dividends = spec.paid_dividends()
    anchors = [0.0] + [time for time, _ in dividends]
    weights = [1.0] + [-1.0] * len(dividends)
    forwards = [forward(spec.spot, spec.rate, spec.yield_curve, maturity)]
    forwards += [
        amount * growth(spec.rate, spec.yield_curve, time, maturity)
        for time, amount in dividends
    ]
    remaining = np.array([
        integrate_product(spec.volatility, spec.volatility, anchor, maturity)
        for anchor in anchors
    ])
    # Anchors ascend, so the later anchor has the smaller remaining variance
    covariance = np.minimum.outer(remaining, remaining)
    return BasketSpec(
        weights=weights,
        forwards=forwards,
        covariance=covariance,
        strike=spec.strike,
        discount=discount(spec.rate, maturity),
        maturity=maturity,
        eta=spec.eta,
    )


def dividends_to_basket(spec):
    """Return the cash dividend option as a basket of positive weights.

    Taking the long asset X = S(0) M(0, T) as numeraire,
    B E[(eta (X - sum_j Y_j - K))^+] = B E'[(-eta (sum_j Y_j' + K' - F))^+]
    with F = S(0) exp(int_0^T (r - q)) and unit-mean lognormals Y_j' =
    Y_j / X * F, K' = K / X * F under the new measure.  Y_j' has forward
    D_j exp(int_t_j^T (r - q)) and K' has forward K.  Their log covariances
    are v(min(tau_i, tau_k)) with v(t) = int_0^t sigma^2, tau_j = t_j and
    tau = T for the strike, the structure of an Asian option.
    """
    if not spec.strike > 0.0:
        raise exceptions.ArgumentError(
            f"dividend option strike must be > 0, got {spec.strike}"
        )
    spec.forward_value()
    maturity = spec.maturity
    dividends = spec.paid_dividends()
    times = [time for time, _ in dividends] + [maturity]
    forwards = [
        amount * growth(spec.rate, spec.yield_curve, time, maturity)
        for time, amount in dividends
    ] + [spec.strike]
    variances = np.array([
        integrate_product(spec.volatility, spec.volatility, 0.0, time)
        for time in times
    ])
    logger.debug("dividend basket with %d assets", len(times))
    return BasketSpec(
        weights=np.ones(len(times)),
        forwards=forwards,
        covariance=np.minimum.outer(variances, variances),
        strike=forward(spec.spot, spec.rate, spec.yield_curve, maturity),
        discount=discount(spec.rate, maturity),
        maturity=maturity,
        eta=-spec.eta,
    )


@functools.singledispatch
def to_basket(instrument):
    """Return the BasketSpec of any supported instrument."""
    raise exceptions.ArgumentError(
        f"unsupported instrument type {type(instrument).__name__}"
    )


@to_basket.register(BasketSpec)
def _basket_to_basket(instrument):
    return instrument


@to_basket.register(AsianSpec)
def _asian_to_basket(instrument):
    return asian_to_basket(instrument)


@to_basket.register(AsianBasketSpec)
def _asian_basket_to_basket(instrument):
    return asian_basket_to_basket(instrument)


@to_basket.register(DividendOptionSpec)
def _dividends_to_basket(instrument):
    return dividends_to_basket(instrument)


def notional(instrument):
    """Return the amount one basis point of error is measured against."""
    if isinstance(instrument, BasketSpec):
        return instrument.basket_forward
    return instrument.notional()


def moneyness_base(instrument):
    """Return the forward value K is compared with, M = K / base - 1."""
    if isinstance(instrument, (AsianSpec, AsianBasketSpec)):
        return instrument.expected_average()
    if isinstance(instrument, DividendOptionSpec):
        return instrument.forward_value()
    return to_basket(instrument).basket_forward


def with_strike(instrument, strike):
    """Return a copy of instrument with a different strike."""
    return dataclasses.replace(instrument, strike=strike)
