"""
Read run configurations.

A run configuration is an INI file.  Arrays and matrices are JSON literals,
and a curve X of section S may be a scalar or a nested section [S.X] holding
breakpoints and values.
"""
import collections
import configparser
import json
import textwrap
import numpy as np
from . import exceptions
from .basket import BasketSpec
from .curves import PiecewiseCurve
from .expansion import DEFAULT_SANITY_BOUND, parse_method
from .montecarlo import McConfig, SAMPLERS, check_config
from .reductions import (
    AssetSpec, AsianBasketSpec, AsianSpec, DividendOptionSpec,
)

INSTRUMENT_TYPES = ("basket", "asian", "asian_basket", "dividend_vanilla")

MC_METHOD = "MC"

# Type to store info read from config file
RunConfig = collections.namedtuple(
    "RunConfig",
    ["instrument", "methods", "mc", "sanity_bound", "output", "sweep"],
)

# Strike grid of a sweep, given as strikes or as moneyness K / base - 1
SweepConfig = collections.namedtuple("SweepConfig", ["variable", "values"])

DEFAULT_MC = McConfig(paths=100000, seed=0)


def get_json(parser, section, option, fallback=None):
    """Return the JSON value of an option, or fallback if it is absent."""
    if not parser.has_option(section, option):
        if fallback is None:
            raise configparser.NoOptionError(option, section)
        return fallback
    raw = parser.get(section, option)
    try:
        return json.loads(raw)
    except json.JSONDecodeError as err:
        raise ValueError(
            f"[{section}] {option}: not a JSON value: {raw!r}"
        ) from err


def get_curve(parser, section, option, fallback=None):
    """Return a scalar or a PiecewiseCurve.

    The nested section [section.option] takes precedence over a scalar.
    """
    nested = f"{section}.{option}"
    if parser.has_section(nested):
        return PiecewiseCurve(
            get_json(parser, nested, "breakpoints"),
            get_json(parser, nested, "values"),
        )
    value = get_json(parser, section, option, fallback)
    if isinstance(value, list):
        raise ValueError(
            f"[{section}] {option}: use a [{nested}] section for a curve"
        )
    return value


def get_times(parser, section):
    """Return observation times from times or first_time, last_time, count."""
    if parser.has_option(section, "times"):
        return get_json(parser, section, "times")
    first = parser.getfloat(section, "first_time")
    last = parser.getfloat(section, "last_time")
    count = parser.getint(section, "count")
    if count < 1:
        raise ValueError(f"[{section}] count must be >= 1, got {count}")
    if count == 1:
        return [last]
    return list(np.linspace(first, last, count))


def get_eta(parser, section):
    """Return +1 for a call, -1 for a put."""
    option = parser.get(section, "option", fallback="call").strip().lower()
    if option not in ("call", "put"):
        raise ValueError(
            f"[{section}] option must be 'call' or 'put', got '{option}'"
        )
    return 1 if option == "call" else -1


def _optional(parser, section, option):
    if parser.has_option(section, option):
        return get_json(parser, section, option)
    return None


def _basket(parser, section):
    maturity = parser.getfloat(section, "maturity")
    discount = parser.getfloat(section, "discount", fallback=None)
    if discount is None:
        rate = parser.getfloat(section, "rate", fallback=0.0)
        discount = float(np.exp(-rate * maturity))
    weights = get_json(parser, section, "weights")
    forwards = get_json(parser, section, "forwards")
    strike = parser.getfloat(section, "strike")
    eta = get_eta(parser, section)
    if parser.has_option(section, "covariance"):
        return BasketSpec(weights, forwards,
                          get_json(parser, section, "covariance"), strike,
                          discount, maturity, eta)
    return BasketSpec.from_market(
        weights, forwards, get_json(parser, section, "volatilities"),
        get_json(parser, section, "correlation"), maturity, strike,
        discount, eta,
    )


def _asian(parser, section):
    return AsianSpec(
        spot=parser.getfloat(section, "spot"),
        rate=get_curve(parser, section, "rate", 0.0),
        yield_curve=get_curve(parser, section, "yield", 0.0),
        volatility=get_curve(parser, section, "volatility"),
        times=get_times(parser, section),
        strike=parser.getfloat(section, "strike"),
        weights=_optional(parser, section, "weights"),
        eta=get_eta(parser, section),
        payment_discount=parser.getfloat(section, "payment_discount",
                                         fallback=None),
        fixings=_optional(parser, section, "fixings"),
        fold_past_fixings=parser.getboolean(section, "fold_past_fixings",
                                           fallback=True),
    )


def _assets(parser, section):
    """Return the AssetSpec of every [asset.NAME] section, in file order."""
    names = get_json(parser, section, "assets")
    assets = []
    for name in names:
        asset_section = f"asset.{name}"
        if not parser.has_section(asset_section):
            raise ValueError(f"missing section [{asset_section}]")
        assets.append(AssetSpec(
            spot=parser.getfloat(asset_section, "spot"),
            yield_curve=get_curve(parser, asset_section, "yield", 0.0),
            volatility=get_curve(parser, asset_section, "volatility"),
        ))
    return assets


def _asian_basket(parser, section):
    return AsianBasketSpec(
        assets=_assets(parser, section),
        rate=get_curve(parser, section, "rate", 0.0),
        correlation=get_json(parser, section, "correlation"),
        basket_weights=get_json(parser, section, "basket_weights"),
        times=get_times(parser, section),
        strike=parser.getfloat(section, "strike"),
        weights=_optional(parser, section, "weights"),
        eta=get_eta(parser, section),
        payment_discount=parser.getfloat(section, "payment_discount",
                                         fallback=None),
        fixings=_optional(parser, section, "fixings"),
        fold_past_fixings=parser.getboolean(section, "fold_past_fixings",
                                           fallback=True),
    )


def _dividend_vanilla(parser, section):
    times = get_json(parser, section, "dividend_times", [])
    amounts = get_json(parser, section, "dividend_amounts", [])
    if len(times) != len(amounts):
        raise ValueError(
            f"[{section}] {len(times)} dividend_times but "
            f"{len(amounts)} dividend_amounts"
        )
    return DividendOptionSpec(
        spot=parser.getfloat(section, "spot"),
        rate=get_curve(parser, section, "rate", 0.0),
        volatility=get_curve(parser, section, "volatility"),
        dividends=tuple(zip(times, amounts)),
        strike=parser.getfloat(section, "strike"),
        maturity=parser.getfloat(section, "maturity"),
        eta=get_eta(parser, section),
        yield_curve=get_curve(parser, section, "yield", 0.0),
    )


_BUILDERS = {
    "basket": _basket,
    "asian": _asian,
    "asian_basket": _asian_basket,
    "dividend_vanilla": _dividend_vanilla,
}


def build_instrument(parser, section="instrument"):
    """Return the instrument spec described by a parser section."""
    kind = parser.get(section, "type").strip().lower()
    if kind not in _BUILDERS:
        raise ValueError(
            f"[{section}] unknown type '{kind}', expected one of "
            f"{', '.join(INSTRUMENT_TYPES)}"
        )
    return _BUILDERS[kind](parser, section)


def parse_methods(text):
    """Return normalized method labels from a comma separated list."""
    methods = [label.strip().upper() for label in text.split(",")]
    methods = [label for label in methods if label]
    if not methods:
        raise ValueError("at least one method is required")
    for label in methods:
        if label != MC_METHOD:
            parse_method(label)
    return methods


def build_mc(parser, section="monte_carlo"):
    """Return the McConfig of a parser section, defaults if it is absent."""
    if not parser.has_section(section):
        return DEFAULT_MC
    sampler = parser.get(section, "sampler", fallback=DEFAULT_MC.sampler)
    if sampler not in SAMPLERS:
        raise ValueError(
            f"[{section}] unknown sampler '{sampler}', expected one of "
            f"{', '.join(SAMPLERS)}"
        )
    mc_config = McConfig(
        paths=parser.getint(section, "paths", fallback=DEFAULT_MC.paths),
        seed=parser.getint(section, "seed", fallback=DEFAULT_MC.seed),
        sampler=sampler,
        antithetic=parser.getboolean(section, "antithetic", fallback=False),
        block_size=parser.getint(section, "block_size",
                                 fallback=DEFAULT_MC.block_size),
    )
    check_config(mc_config)
    return mc_config


def build_sweep(parser, section="sweep"):
    """Return the SweepConfig of a parser section, None if it is absent."""
    if not parser.has_section(section):
        return None
    present = [
        variable for variable in ("moneyness", "strikes")
        if parser.has_option(section, variable)
    ]
    if len(present) != 1:
        raise ValueError(
            f"[{section}] needs exactly one of 'moneyness' or 'strikes'"
        )
    values = get_json(parser, section, present[0])
    if not isinstance(values, list) or not values:
        raise ValueError(f"[{section}] {present[0]} must be a non-empty array")
    return SweepConfig(present[0], [float(value) for value in values])


def parse_config(parser):
    """Return the RunConfig of a parser holding a whole run configuration."""
    return RunConfig(
        instrument=build_instrument(parser),
        methods=parse_methods(parser.get("pricing", "methods")),
        mc=build_mc(parser),
        sanity_bound=parser.getfloat("pricing", "sanity_bound",
                                     fallback=DEFAULT_SANITY_BOUND),
        output=parser.get("pricing", "output", fallback=None),
        sweep=build_sweep(parser),
    )


def read_config(config_path):
    """Read configuration file and return a RunConfig object."""
    try:
        parser = configparser.RawConfigParser()
        with open(config_path, encoding="utf-8") as config_file:
            parser.read_file(config_file)
        return parse_config(parser)
    except (OSError, configparser.Error, ValueError, TypeError,
            exceptions.BasketexpError) as err:
        raise exceptions.ConfigError(f"{config_path}: {err}") from err


def config_from_dict(data):
    """Return the RunConfig of a dictionary of sections."""
    parser = configparser.RawConfigParser()
    parser.read_dict(data)
    return parse_config(parser)


SAMPLE_CONFIG = textwrap.dedent("""\
    # basketexp run configuration
    #
    # Arrays and matrices are JSON: times = [0.5, 1.0]
    # A curve X may be a scalar or a section [instrument.X] with
    #   breakpoints = [1.0, 2.0]
    #   values = [0.20, 0.25, 0.30]
    #
    # [instrument] type is one of basket, asian, asian_basket or
    # dividend_vanilla.  option is call or put.

    # Weekly averaging call over 3 years, 157 dates starting today
    [instrument]
    type = asian
    option = call
    spot = 100
    rate = 0.09
    yield = 0.0
    volatility = 0.3
    first_time = 0.0
    last_time = 3.0
    count = 157
    strike = 100

    # Methods are VG0..VG3, VL0..VL3 and MC
    [pricing]
    methods = VG1, VG2, VG3, VL3, MC
    sanity_bound = 100

    [monte_carlo]
    paths = 100000
    seed = 0
    sampler = pseudorandom
    antithetic = false
    block_size = 8192

    # Optional, used by the sweep command: moneyness or strikes
    # [sweep]
    # moneyness = [-0.2, -0.1, 0.0, 0.1, 0.2]

    # Example: basket of two assets
    # [instrument]
    # type = basket
    # weights = [0.5, 0.5]
    # forwards = [100, 100]
    # volatilities = [0.3, 0.4]
    # correlation = 0.5
    # maturity = 5
    # rate = 0.0
    # strike = 100

    # Example: European call with cash dividends
    # [instrument]
    # type = dividend_vanilla
    # spot = 100
    # rate = 0.06
    # volatility = 0.25
    # dividend_times = [0.9, 1.9, 2.9]
    # dividend_amounts = [6, 6.5, 7]
    # maturity = 3
    # strike = 100
""")


def create_sample_config(config_path):
    """Write a sample config, refusing to overwrite an existing file."""
    if config_path.exists():
        raise exceptions.ConfigError(f"file exists: {config_path}")
    with config_path.open("w", encoding="utf-8") as config_file:
        config_file.write(SAMPLE_CONFIG)


def instrument_from_dict(data, section="instrument"):
    """Return the instrument of a dictionary of sections."""
    parser = configparser.RawConfigParser()
    parser.read_dict(data)
    return build_instrument(parser, section)
