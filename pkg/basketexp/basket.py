"""
Canonical basket pricing input and its lognormal proxies.

A basket pays [eta (sum_i w_i S_i(T) - K)]^+ at T.  Dividing by the basket
forward A = sum_i w_i F_i turns it into an option on sum_i atilde_i S*_i(T)
with strike K* = K / A, where the S*_i are unit-mean lognormals whose
integrated covariance matrix is V.  The proxies replace that sum by a scaled
geometric mean alpha * prod_i S*_i^a_i.
"""
import collections
import dataclasses
import enum
import math
import numpy as np
from . import exceptions
from .black76 import black

# Relative tolerance used when checking V for symmetry and semidefiniteness
COVARIANCE_TOLERANCE = 1e-12


class ProxyKind(enum.Enum):
    """Lognormal proxy used as the expansion anchor."""

    VORST_GEOMETRIC = "VG"
    VORST_LEVY = "VL"


# Derived proxy quantities feeding the expansion formulas
ProxyParams = collections.namedtuple(
    "ProxyParams",
    ["kind", "atilde", "a", "nu2", "alpha", "vbar", "kstar",
     "basket_forward"],
)

# Price plus diagnostics.  std_error is only set by the Monte Carlo oracle.
PriceResult = collections.namedtuple(
    "PriceResult",
    ["price", "diagnostics", "std_error"],
    defaults=[None],
)


@dataclasses.dataclass(frozen=True, eq=False)
class BasketSpec:
    """Canonical pricing input.

    covariance is the integrated covariance matrix
    V_ij = rho_ij int_0^T sigma_i sigma_j ds, so V_ii is the total variance
    of asset i.
    """

    # A basket spec mirrors the payoff definition one field per quantity
    # pylint: disable=too-many-instance-attributes

    weights: np.ndarray
    forwards: np.ndarray
    covariance: np.ndarray
    strike: float
    discount: float = 1.0
    maturity: float = 1.0
    eta: int = 1

    def __post_init__(self):
        """Coerce arrays and check the invariants."""
        weights = _readonly(self.weights, "weights")
        forwards = _readonly(self.forwards, "forwards")
        covariance = _readonly(self.covariance, "covariance")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "forwards", forwards)
        object.__setattr__(self, "covariance", covariance)
        object.__setattr__(self, "strike", float(self.strike))
        object.__setattr__(self, "discount", float(self.discount))
        object.__setattr__(self, "maturity", float(self.maturity))

        if weights.ndim != 1 or weights.shape[0] == 0:
            raise exceptions.ArgumentError(
                "weights must be a non-empty vector"
            )
        size = weights.shape[0]
        if forwards.shape != (size,):
            raise exceptions.ArgumentError(
                f"expected {size} forwards, got shape {forwards.shape}"
            )
        if covariance.shape != (size, size):
            raise exceptions.ArgumentError(
                f"expected {size}x{size} covariance, "
                f"got shape {covariance.shape}"
            )
        if not np.all(np.isfinite(weights)):
            raise exceptions.ArgumentError("weights must be finite")
        if np.any(~(forwards > 0.0)):
            raise exceptions.ArgumentError("forwards must be > 0")
        if not math.isfinite(self.strike):
            raise exceptions.ArgumentError("strike must be finite")
        if not 0.0 < self.discount <= 1.0:
            raise exceptions.ArgumentError(
                f"discount must be in (0, 1], got {self.discount}"
            )
        if not self.maturity > 0.0:
            raise exceptions.ArgumentError(
                f"maturity must be > 0, got {self.maturity}"
            )
        if self.eta not in (1, -1):
            raise exceptions.ArgumentError(
                f"eta must be +1 or -1, got {self.eta}"
            )
        object.__setattr__(self, "eta", int(self.eta))
        _check_covariance(covariance)
        if not self.basket_forward > 0.0:
            raise exceptions.ArgumentError(
                f"basket forward sum w_i F_i must be > 0, "
                f"got {self.basket_forward}"
            )

    @classmethod
    def from_market(cls, weights, forwards, volatilities, correlation,
                    maturity, strike, discount=1.0, eta=1):
        """Build a basket from implied volatilities and correlations.

        V_ij = rho_ij sigma_i sigma_j T.  A scalar correlation means the same
        correlation between every pair of distinct assets.
        """
        # pylint: disable=too-many-arguments
        sigma = np.asarray(volatilities, dtype=float)
        correlation = np.asarray(correlation, dtype=float)
        if correlation.ndim == 0:
            correlation = np.full((sigma.size, sigma.size), float(correlation))
            np.fill_diagonal(correlation, 1.0)
        covariance = correlation * np.outer(sigma, sigma) * maturity
        return cls(weights, forwards, covariance, strike, discount,
                   maturity, eta)

    @property
    def size(self):
        """Return the number of assets."""
        return self.weights.shape[0]

    @property
    def basket_forward(self):
        """Return A = sum_i w_i F_i."""
        return math.fsum(self.weights * self.forwards)

    def with_strike(self, strike):
        """Return a copy of this basket with a different strike."""
        return dataclasses.replace(self, strike=strike)

    def with_eta(self, eta):
        """Return a copy of this basket with a different call/put sign."""
        return dataclasses.replace(self, eta=eta)


def _readonly(values, name):
    try:
        array = np.array(values, dtype=float)
    except (TypeError, ValueError) as err:
        raise exceptions.ArgumentError(f"{name}: {err}") from err
    array.setflags(write=False)
    return array


def _check_covariance(covariance):
    """Raise ArgumentError unless V is a valid covariance matrix."""
    scale = max(np.max(np.abs(covariance)), 1.0)
    tolerance = COVARIANCE_TOLERANCE * scale
    if not np.all(np.isfinite(covariance)):
        raise exceptions.ArgumentError("covariance must be finite")
    if np.max(np.abs(covariance - covariance.T)) > tolerance:
        raise exceptions.ArgumentError("covariance must be symmetric")
    diagonal = np.diag(covariance)
    if np.any(diagonal < 0.0):
        raise exceptions.ArgumentError("covariance diagonal must be >= 0")
    bound = np.sqrt(np.outer(diagonal, diagonal))
    if np.any(np.abs(covariance) > bound * (1.0 + 1e-10) + tolerance):
        raise exceptions.ArgumentError(
            "covariance entries exceed sqrt(V_ii V_jj)"
        )
    smallest = np.linalg.eigvalsh(covariance)[0]
    if smallest < -tolerance:
        raise exceptions.ArgumentError(
            f"covariance is not positive semidefinite, "
            f"eigenvalue {smallest:.3e}"
        )


def normalized_weights(spec):
    """Return atilde_i = w_i F_i / A, summing to one."""
    return spec.weights * spec.forwards / spec.basket_forward


def geometric_moments(spec, exponents):
    """Return (E[ln G], Var[ln G]) for G = prod_i S*_i ^ a_i."""
    exponents = np.asarray(exponents, dtype=float)
    if exponents.shape != (spec.size,):
        raise exceptions.ArgumentError(
            f"expected {spec.size} exponents, got shape {exponents.shape}"
        )
    covariance = spec.covariance
    mean = -0.5 * math.fsum(exponents * np.diag(covariance))
    variance = math.fsum(
        (np.outer(exponents, exponents) * covariance).ravel()
    )
    return mean, max(variance, 0.0)


def levy_variance(spec, atilde):
    """Return nu_A^2 = ln(sum_ij atilde_i atilde_j exp(V_ij)).

    With sum_i atilde_i = 1 this is the log of the second moment of the
    normalized arithmetic mean, matched by the Levy lognormal.
    """
    atilde = np.asarray(atilde, dtype=float)
    # Long-short baskets have large atilde of both signs
    scale = max(1.0, math.fsum(np.abs(atilde)))
    if abs(math.fsum(atilde) - 1.0) > 1e-12 * scale:
        raise exceptions.ArgumentError(
            f"normalized weights must sum to 1, got {math.fsum(atilde)}"
        )
    second_moment = math.fsum(
        (np.outer(atilde, atilde) * np.exp(spec.covariance)).ravel()
    )
    if not second_moment > 0.0:
        raise exceptions.ProxyDomainError(
            f"Levy second moment {second_moment} is not positive"
        )
    return max(math.log(second_moment), 0.0)


def make_proxy(spec, kind=ProxyKind.VORST_GEOMETRIC):
    """Return the ProxyParams of the Vorst geometric or Vorst Levy proxy."""
    kind = ProxyKind(kind)
    atilde = normalized_weights(spec)
    _, nu_tilde2 = geometric_moments(spec, atilde)
    exponents = atilde
    if kind is ProxyKind.VORST_LEVY:
        nu_levy2 = levy_variance(spec, atilde)
        if nu_tilde2 > 0.0:
            exponents = atilde * math.sqrt(nu_levy2 / nu_tilde2)
        elif nu_levy2 > 0.0:
            raise exceptions.DegenerateProxyError(
                f"geometric variance is zero but Levy variance is {nu_levy2}"
            )
    _, nu2 = geometric_moments(spec, exponents)
    covariance = spec.covariance
    alpha = math.exp(
        0.5 * math.fsum(exponents * np.diag(covariance)) - 0.5 * nu2
    )
    vbar = covariance @ exponents
    basket_forward = spec.basket_forward
    return ProxyParams(
        kind=kind,
        atilde=atilde,
        a=exponents,
        nu2=nu2,
        alpha=alpha,
        vbar=vbar,
        kstar=spec.strike / basket_forward,
        basket_forward=basket_forward,
    )


def diagnostics(params, order):
    """Return the diagnostics dictionary attached to a PriceResult."""
    return {
        "A": params.basket_forward,
        "Kstar": params.kstar,
        "nu2": params.nu2,
        "alpha": params.alpha,
        "order": order,
        "proxy": params.kind.value,
    }


def intrinsic_price(spec):
    """Return the discounted intrinsic value B max(eta (A - K), 0)."""
    return spec.discount * max(spec.eta * (spec.basket_forward - spec.strike),
                               0.0)


def proxy_price(spec, params):
    """Return the order-0 price A * Black(1, K*, nu^2, T)."""
    if params.kstar <= 0.0:
        # Calls are always exercised, puts never
        price = intrinsic_price(spec)
    else:
        price = params.basket_forward * float(black(
            1.0, params.kstar, params.nu2, spec.maturity,
            spec.discount, spec.eta,
        ))
    return PriceResult(price, diagnostics(params, 0))
