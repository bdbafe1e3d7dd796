"""Stochastic expansion pricing of basket, Asian and cash dividend options."""

from .basket import BasketSpec, PriceResult, ProxyKind, make_proxy
from .curves import PiecewiseCurve
from .expansion import expand_price, price_basket
from .montecarlo import McConfig, factor_psd, price_mc, price_mc_strikes
from .reductions import (
    AssetSpec, AsianBasketSpec, AsianSpec, DividendOptionSpec,
    asian_basket_to_basket, asian_to_basket, dividends_to_basket,
    dividends_to_spread_basket, to_basket,
)
from .exceptions import BasketexpError
