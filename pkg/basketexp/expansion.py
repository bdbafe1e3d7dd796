"""
Stochastic expansions of basket prices around a lognormal proxy.

The arithmetic basket X = sum_i atilde_i S*_i is written as the proxy
G* = alpha G plus the difference X - G*, and the payoff is Taylor expanded in
that difference up to the third order.  Each moment E[S*_i ... G*^k h^(k)]
becomes, after a change of measure, a strike derivative of a Black price
whose forward is shifted by exp(vbar_i + ...).  All Black evaluations share
the strike K*, the variance nu^2, the discount and the call/put sign.
"""
import functools
import logging
import math
import re
import numpy as np
from . import exceptions
from .basket import (
    ProxyKind, PriceResult, diagnostics, intrinsic_price, make_proxy,
    proxy_price,
)
from .black76 import black_dk, black_d2k, black_d3k

logger = logging.getLogger(__name__)

# Warn when alpha * exp(3 nu^2) exceeds this, the expansion is likely to
# diverge.
DEFAULT_SANITY_BOUND = 100.0

MAX_ORDER = 3


def accumulate(terms):
    """Return the sum of terms, largest magnitude first, compensated."""
    terms = np.ravel(np.asarray(terms, dtype=float))
    order = np.argsort(-np.abs(terms), kind="stable")
    return math.fsum(terms[order])


@functools.lru_cache(maxsize=16)
def pair_indices(size):
    """Return (i, j, multiplicity) over i <= j."""
    first, second = np.triu_indices(size)
    multiplicity = np.where(first == second, 1.0, 2.0)
    for array in (first, second, multiplicity):
        array.setflags(write=False)
    return first, second, multiplicity


@functools.lru_cache(maxsize=4)
def triple_indices(size):
    """Return (i, j, l, multiplicity) over i <= j <= l.

    Multiplicity is 1 when all three indices are equal, 3 when exactly two
    are equal and 6 when they are distinct.
    """
    first, second = np.triu_indices(size)
    counts = size - second
    total = int(counts.sum())
    starts = np.repeat(np.cumsum(counts) - counts, counts)
    first = np.repeat(first, counts)
    second = np.repeat(second, counts)
    third = second + (np.arange(total) - starts)
    multiplicity = np.full(total, 6.0)
    multiplicity[(first == second) | (second == third)] = 3.0
    multiplicity[first == third] = 1.0
    for array in (first, second, third, multiplicity):
        array.setflags(write=False)
    return first, second, third, multiplicity


def symmetric_double_sum(atilde, vbar, covariance, kernel):
    """Return sum_ij atilde_i atilde_j exp(V_ij) kernel(vbar_i + vbar_j).

    Only i <= j is evaluated, off-diagonal terms counted twice.
    """
    atilde = np.asarray(atilde, dtype=float)
    vbar = np.asarray(vbar, dtype=float)
    covariance = np.asarray(covariance, dtype=float)
    first, second, multiplicity = pair_indices(atilde.size)
    weight = (
        multiplicity * atilde[first] * atilde[second]
        * np.exp(covariance[first, second])
    )
    return accumulate(weight * kernel(vbar[first] + vbar[second]))


def symmetric_triple_sum(atilde, vbar, covariance, kernel):
    """Return the triple sum over i, j, l.

    Terms are atilde_i atilde_j atilde_l exp(V_il + V_jl + V_ij)
    kernel(vbar_i + vbar_j + vbar_l), only i <= j <= l is evaluated.
    """
    atilde = np.asarray(atilde, dtype=float)
    vbar = np.asarray(vbar, dtype=float)
    covariance = np.asarray(covariance, dtype=float)
    first, second, third, multiplicity = triple_indices(atilde.size)
    weight = multiplicity * atilde[first] * atilde[second] * atilde[third]
    weight *= np.exp(
        covariance[first, third]
        + covariance[second, third]
        + covariance[first, second]
    )
    shift = vbar[first] + vbar[second] + vbar[third]
    return accumulate(weight * kernel(shift))


def _correction_terms(spec, params, order):
    """Return the order 1..order correction terms, before scaling by A."""
    nu2 = params.nu2
    atilde = params.atilde
    vbar = params.vbar
    covariance = spec.covariance

    def strike_derivative(derivative, shift):
        """Evaluate a strike derivative of Black at forward exp(shift)."""
        return derivative(
            np.exp(shift), params.kstar, nu2, spec.maturity,
            spec.discount, spec.eta,
        )

    terms = [
        float(strike_derivative(black_dk, nu2)),
        -accumulate(atilde * strike_derivative(black_dk, vbar)),
    ]
    if order >= 2:
        terms += [
            0.5 * math.exp(nu2) * float(strike_derivative(black_d2k, 2 * nu2)),
            -accumulate(
                atilde * np.exp(vbar)
                * strike_derivative(black_d2k, nu2 + vbar)
            ),
            0.5 * symmetric_double_sum(
                atilde, vbar, covariance,
                lambda shift: strike_derivative(black_d2k, shift),
            ),
        ]
    if order >= 3:
        terms += [
            math.exp(3 * nu2)
            * float(strike_derivative(black_d3k, 3 * nu2)) / 6.0,
            -0.5 * accumulate(
                atilde * np.exp(nu2 + 2 * vbar)
                * strike_derivative(black_d3k, 2 * nu2 + vbar)
            ),
            0.5 * symmetric_double_sum(
                atilde, vbar, covariance,
                lambda shift: (
                    np.exp(shift) * strike_derivative(black_d3k, nu2 + shift)
                ),
            ),
            -symmetric_triple_sum(
                atilde, vbar, covariance,
                lambda shift: strike_derivative(black_d3k, shift),
            ) / 6.0,
        ]
    return terms


def expand_price(spec, kind=ProxyKind.VORST_GEOMETRIC, order=MAX_ORDER,
                 sanity_bound=DEFAULT_SANITY_BOUND):
    """Return the expansion price of a basket at order 0, 1, 2 or 3.

    Order 0 is the proxy price itself: the Vorst geometric price for
    VORST_GEOMETRIC and the Levy price for VORST_LEVY.
    """
    if order not in range(MAX_ORDER + 1):
        raise exceptions.ArgumentError(
            f"expansion order must be 0..{MAX_ORDER}, got {order}"
        )
    params = make_proxy(spec, kind)
    if params.kstar <= 0.0:
        return PriceResult(intrinsic_price(spec), diagnostics(params, order))
    if order == 0:
        return proxy_price(spec, params)
    if params.nu2 <= 0.0:
        if np.any(spec.covariance):
            raise exceptions.DegenerateProxyError(
                "proxy variance is zero for a random basket"
            )
        return PriceResult(intrinsic_price(spec), diagnostics(params, order))

    divergence = params.alpha * math.exp(min(3 * params.nu2, 700.0))
    if divergence > sanity_bound:
        logger.warning(
            "%s%d: alpha * exp(3 nu^2) = %.4g exceeds %.4g, "
            "the expansion may diverge",
            params.kind.value, order, divergence, sanity_bound,
        )

    try:
        with np.errstate(over="ignore", invalid="ignore"):
            terms = _correction_terms(spec, params, order)
    except OverflowError as err:
        raise exceptions.NumericalFailureError(
            f"{params.kind.value}{order}: {err}"
        ) from err
    if not all(math.isfinite(term) for term in terms):
        raise exceptions.NumericalFailureError(
            f"{params.kind.value}{order}: non-finite expansion term, "
            f"nu^2 = {params.nu2:.4g}"
        )
    price = (
        proxy_price(spec, params).price
        + params.basket_forward * accumulate(terms)
    )
    if not math.isfinite(price):
        raise exceptions.NumericalFailureError(
            f"{params.kind.value}{order}: non-finite price"
        )
    return PriceResult(price, diagnostics(params, order))


_METHOD_RE = re.compile(r"^(VG|VL)([0-3])$")


def parse_method(label):
    """Return (ProxyKind, order) for a label such as "VG3" or "VL2"."""
    match = _METHOD_RE.match(label.strip().upper())
    if not match:
        raise exceptions.ArgumentError(
            f"unknown expansion method '{label}', expected VG0..VG3 or "
            "VL0..VL3"
        )
    return ProxyKind(match.group(1)), int(match.group(2))


def price_basket(spec, method, sanity_bound=DEFAULT_SANITY_BOUND):
    """Return the PriceResult of spec for a method label like "VL3"."""
    kind, order = parse_method(method)
    return expand_price(spec, kind, order, sanity_bound)
