"""
Built-in benchmark tables and strike sweeps.

Tables and sweeps are data: an instrument given as config sections, the rows
or strikes to evaluate and the published reference values.  Evaluating them
only goes through the public pricing API.
"""
import collections
import logging
import math
import numpy as np
from . import exceptions
from .config import SweepConfig, instrument_from_dict
from .expansion import price_basket
from .montecarlo import SOBOL, price_mc, price_mc_strikes
from .reductions import moneyness_base, notional, to_basket, with_strike

logger = logging.getLogger(__name__)

PRICE = "price"
BASIS_POINTS = "bp"

TABLE_METHODS = ("VG1", "VG2", "VG3", "VL3")

# One table row: labels shown in the CSV and [instrument] overrides.  The
# override "moneyness" sets K = (1 + M) * sum_i w_i F(0, t_i).
TableRow = collections.namedtuple("TableRow", ["labels", "overrides"])

# Reference MC of the built-in tables and sweeps
REFERENCE_PATHS = 2 ** 22

TableDefinition = collections.namedtuple(
    "TableDefinition",
    ["table_id", "title", "instrument", "rows", "methods", "references",
     "tolerance", "error_unit", "paths", "sampler"],
    defaults=[TABLE_METHODS, None, 0.0, PRICE, REFERENCE_PATHS, SOBOL],
)

SweepDefinition = collections.namedtuple(
    "SweepDefinition",
    ["sweep_id", "title", "instrument", "sweep", "methods", "paths",
     "sampler"],
    defaults=[("VG1", "VG2", "VG3", "VL3"), REFERENCE_PATHS, SOBOL],
)

# Evaluated table: header, data rows, RMSE/MAE footer and reference misses
TableResult = collections.namedtuple(
    "TableResult", ["header", "rows", "footer", "mismatches"],
)

Mismatch = collections.namedtuple(
    "Mismatch", ["row", "column", "value", "reference"],
)


def _grid(first, last, count):
    return [float(round(x, 10)) for x in np.linspace(first, last, count)]


# Weekly averaging over 3 years, 157 dates from today
JU_WEEKLY = TableDefinition(
    table_id="ju_weekly",
    title="Weekly averaging calls, T = 3, r = 9%",
    instrument={"instrument": {
        "type": "asian", "spot": 100, "rate": 0.09, "yield": 0.0,
        "first_time": 0.0, "last_time": 3.0, "count": 157, "strike": 100,
        "volatility": 0.05, "fold_past_fixings": False,
    }},
    rows=tuple(
        TableRow({"sigma": sigma, "K": strike},
                 {"volatility": sigma, "strike": strike})
        for sigma in (0.05, 0.10, 0.20, 0.30, 0.40, 0.50)
        for strike in (95, 100, 105)
    ),
    references={
        "MC": (15.1197, 11.3069, 7.5561, 15.2163, 11.6390, 8.3911,
               16.6342, 13.7626, 11.2146, 19.0145, 16.5766, 14.3830,
               21.7269, 19.5738, 17.6110, 24.5527, 22.6115, 20.8241),
        "VG1": (15.1197, 11.3069, 7.5561, 15.2159, 11.6387, 8.3908,
                16.6317, 13.7600, 11.2118, 19.0058, 16.5675, 14.3733,
                21.7056, 19.5516, 17.5878, 24.5106, 22.5679, 20.7791),
        "VG2": (15.1197, 11.3070, 7.5561, 15.2163, 11.6390, 8.3911,
                16.6341, 13.7625, 11.2145, 19.0140, 16.5762, 14.3827,
                21.7256, 19.5727, 17.6100, 24.5498, 22.6090, 20.8219),
        "VG3": (15.1197, 11.3069, 7.5561, 15.2163, 11.6390, 8.3911,
                16.6342, 13.7626, 11.2146, 19.0144, 16.5766, 14.3830,
                21.7268, 19.5737, 17.6109, 24.5524, 22.6113, 20.8239),
        "VL3": (15.1197, 11.3069, 7.5561, 15.2163, 11.6390, 8.3911,
                16.6342, 13.7626, 11.2146, 19.0144, 16.5766, 14.3830,
                21.7267, 19.5737, 17.6108, 24.5523, 22.6111, 20.8238),
    },
    tolerance=1.01e-4,
)

# Four assets, spot 100, equal weights, T = 5, r = 0
_KREKEL = {"instrument": {
    "type": "basket", "weights": [0.25] * 4, "forwards": [100.0] * 4,
    "volatilities": [0.4] * 4, "correlation": 0.5, "maturity": 5.0,
    "rate": 0.0, "strike": 100,
}}

KREKEL_RHO = TableDefinition(
    table_id="krekel_rho",
    title="Basket calls, T = 5, sigma = 40%, varying correlation",
    instrument=_KREKEL,
    rows=tuple(
        TableRow({"rho": rho}, {"correlation": rho})
        for rho in (0.10, 0.30, 0.50, 0.70, 0.80, 0.95)
    ),
    references={
        "MC": (21.692, 25.029, 28.007, 30.743, 32.041, 33.919),
        "VG1": (20.124, 24.209, 27.633, 30.620, 31.989, 33.916),
        "VG2": (22.224, 25.212, 28.059, 30.752, 32.044, 33.919),
        "VG3": (21.440, 24.961, 27.994, 30.741, 32.041, 33.919),
        "VL3": (21.612, 24.985, 27.996, 30.742, 32.041, 33.919),
    },
    tolerance=1.01e-3,
)

KREKEL_STRIKE = TableDefinition(
    table_id="krekel_strike",
    title="Basket calls, T = 5, sigma = 40%, rho = 50%, varying strike",
    instrument=_KREKEL,
    rows=tuple(
        TableRow({"K": strike}, {"strike": strike})
        for strike in range(50, 151, 10)
    ),
    references={
        "MC": (54.310, 47.481, 41.522, 36.351, 31.876, 28.007, 24.660,
               21.762, 19.249, 17.065, 15.164),
        "VG1": (54.158, 47.270, 41.257, 36.041, 31.530, 27.633, 24.266,
                21.356, 18.837, 16.652, 14.753),
        "VG2": (54.345, 47.524, 41.572, 36.404, 31.930, 28.059, 24.710,
                21.808, 19.291, 17.102, 15.196),
        "VG3": (54.290, 47.459, 41.501, 36.332, 31.860, 27.994, 24.651,
                21.756, 19.246, 17.065, 15.165),
        "VL3": (54.289, 47.459, 41.502, 36.334, 31.862, 27.996, 24.653,
                21.758, 19.248, 17.066, 15.167),
    },
    tolerance=1.01e-3,
)

_KREKEL_VOLS = (0.05, 0.10, 0.15, 0.20, 0.30, 0.40, 0.50, 0.60, 0.70, 0.80,
                1.00)

KREKEL_VOL = TableDefinition(
    table_id="krekel_vol",
    title="Basket calls, T = 5, rho = 50%, varying volatility",
    instrument=_KREKEL,
    rows=tuple(
        TableRow({"sigma": sigma}, {"volatilities": [sigma] * 4})
        for sigma in _KREKEL_VOLS
    ),
    references={
        "MC": (3.526, 7.050, 10.570, 14.083, 21.078, 28.009, 34.826, 41.488,
               47.940, 54.128, 65.354),
        "VG1": (3.525, 7.043, 10.548, 14.032, 20.912, 27.633, 34.147,
                40.412, 46.390, 52.050, 62.324),
        "VG2": (3.526, 7.050, 10.570, 14.085, 21.091, 28.059, 34.986,
                41.881, 48.768, 55.705, 70.201),
        "VG3": (3.526, 7.050, 10.570, 14.083, 21.078, 27.994, 34.737,
                41.070, 46.363, 48.888, 15.447),
        "VL3": (3.526, 7.050, 10.570, 14.083, 21.078, 27.996, 34.750,
                41.119, 46.502, 49.139, 9.938),
    },
    tolerance=1.01e-3,
)

KREKEL_INHOM = TableDefinition(
    table_id="krekel_inhom",
    title="Basket calls, T = 5, rho = 50%, sigma_1 = 100%, varying sigma",
    instrument=_KREKEL,
    rows=tuple(
        TableRow({"sigma": sigma}, {"volatilities": [1.0] + [sigma] * 3})
        for sigma in _KREKEL_VOLS
    ),
    references={
        "MC": (19.403, 21.092, 23.001, 25.304, 30.553, 36.023, 41.493,
               46.733, 51.961, 56.792, 65.354),
        "VG1": (16.579, 18.822, 21.263, 23.836, 29.186, 34.601, 39.920,
                45.036, 49.878, 54.394, 62.324),
        "VG2": (17.854, 19.934, 22.286, 24.823, 30.225, 35.841, 41.538,
                47.264, 52.998, 58.733, 70.201),
        "VG3": (18.687, 20.542, 22.751, 25.209, 30.541, 36.031, 41.270,
                45.719, 48.465, 47.745, 15.447),
        "VL3": (19.251, 20.836, 22.757, 24.987, 30.164, 35.806, 41.283,
                45.907, 48.679, 47.711, 9.938),
    },
    tolerance=1.01e-3,
)

# Yearly cash dividends, 7 year call
_DIVIDENDS_7Y = {"instrument": {
    "type": "dividend_vanilla", "spot": 100, "rate": 0.06,
    "volatility": 0.25, "maturity": 7.0, "strike": 100,
    "dividend_times": [0.9, 1.9, 2.9, 3.9, 4.9, 5.9, 6.9],
    "dividend_amounts": [6, 6.5, 7, 7.5, 8, 8, 8],
}}

DIVIDENDS_7Y = TableDefinition(
    table_id="dividends_7y",
    title="Call with yearly cash dividends, T = 7, r = 6%, sigma = 25%",
    instrument=_DIVIDENDS_7Y,
    rows=tuple(
        TableRow({"K": strike}, {"strike": strike})
        for strike in (70, 100, 130)
    ),
    methods=("VL2", "VL3", "VG3"),
    references={
        "VL3": (27.21392, 19.48226, 14.13023),
        "VL2": (27.21367, 19.48181, 14.12969),
    },
    tolerance=1e-4,
)

_MONEYNESS = (-0.5, 0.0, 0.5)


def _lord(sigma, dates):
    return {"instrument": {
        "type": "asian", "spot": 100, "rate": 0.05, "yield": 0.0,
        "volatility": sigma, "times": [float(t) for t in range(1, dates + 1)],
        "strike": 100,
    }}


# Errors in basis points of spot against the local Monte Carlo price
LORD_5Y = TableDefinition(
    table_id="lord_5y",
    title="Yearly averaging calls, T = 5, sigma = 50%, errors in bp",
    instrument=_lord(0.5, 5),
    rows=tuple(
        TableRow({"M": m}, {"moneyness": m}) for m in _MONEYNESS
    ),
    references={
        "VG1": (-10.96, -10.67, -10.27),
        "VG2": (-0.20, -0.37, 0.45),
        "VG3": (0.19, -0.11, -0.29),
        "VL3": (0.31, -0.14, -0.23),
    },
    tolerance=0.5,
    error_unit=BASIS_POINTS,
)

LORD_30Y = TableDefinition(
    table_id="lord_30y",
    title="Yearly averaging calls, T = 30, sigma = 25%, errors in bp",
    instrument=_lord(0.25, 30),
    rows=tuple(
        TableRow({"M": m}, {"moneyness": m}) for m in _MONEYNESS
    ),
    references={
        "VG1": (-7.59, -7.95, -7.84),
        "VG2": (-0.51, -0.43, 0.02),
        "VG3": (0.06, -0.04, -0.10),
        "VL3": (0.12, -0.08, -0.11),
    },
    tolerance=0.5,
    error_unit=BASIS_POINTS,
)

TABLES = {
    table.table_id: table
    for table in (JU_WEEKLY, KREKEL_RHO, KREKEL_STRIKE, KREKEL_VOL,
                  KREKEL_INHOM, DIVIDENDS_7Y, LORD_5Y, LORD_30Y)
}


# Stand-in market data for the five stock Asian basket: spots 100, one
# factor correlation rho_jl = beta_j beta_l.
_BETA = np.array([0.6, 0.7, 0.8, 0.5, 0.65])
_STAND_IN_CORRELATION = np.outer(_BETA, _BETA)
np.fill_diagonal(_STAND_IN_CORRELATION, 1.0)


def _asian_basket(maturity):
    months = [maturity - k / 12.0 for k in range(4, -1, -1)]
    sections = {
        "instrument": {
            "type": "asian_basket", "rate": 0.05,
            "assets": ["s1", "s2", "s3", "s4", "s5"],
            "basket_weights": [0.35, 0.25, 0.20, 0.15, 0.05],
            "correlation": _STAND_IN_CORRELATION.round(4).tolist(),
            "times": [round(t, 12) for t in months],
            "strike": 100,
        },
    }
    for name, sigma, dividend in zip(
            ["s1", "s2", "s3", "s4", "s5"],
            [0.40, 0.35, 0.30, 0.25, 0.20],
            [0.01, 0.02, 0.0, 0.015, 0.03]):
        sections[f"asset.{name}"] = {
            "spot": 100, "volatility": sigma, "yield": dividend,
        }
    return sections


_HAL = {"instrument": {
    "type": "asian", "spot": 30.78, "rate": 0.06, "yield": 0.0097,
    "volatility": 0.4133, "first_time": 1 / 12, "last_time": 1.0,
    "count": 12, "strike": 30.78,
}}

_TWO_OBSERVATIONS = {"instrument": {
    "type": "asian", "spot": 100, "rate": 0.05, "volatility": 0.5,
    "times": [0.1, 1.1], "strike": 100,
}}

# Semi-annual dividends of 2 from one day after today, 10 year call
_DIVIDENDS_10Y = {"instrument": {
    "type": "dividend_vanilla", "spot": 100, "rate": 0.03,
    "volatility": 0.25, "maturity": 10.0, "strike": 100,
    "dividend_times": [round(1 / 365 + 0.5 * k, 12) for k in range(20)],
    "dividend_amounts": [2.0] * 20,
}}

_WIDE_MONEYNESS = SweepConfig("moneyness", _grid(-0.5, 1.0, 16))

SWEEPS = {
    sweep.sweep_id: sweep
    for sweep in (
        SweepDefinition(
            "hal_monthly", "HAL monthly averaging, T = 1", _HAL,
            SweepConfig("strikes", [
                round(30.78 * k, 10) for k in _grid(0.7, 1.3, 13)
            ]),
        ),
        SweepDefinition("lord_5y", "Yearly averaging, T = 5",
                        _lord(0.5, 5), _WIDE_MONEYNESS),
        SweepDefinition("lord_30y", "Yearly averaging, T = 30",
                        _lord(0.25, 30), _WIDE_MONEYNESS),
        SweepDefinition("lord_two_obs", "Two remaining observations",
                        _TWO_OBSERVATIONS,
                        SweepConfig("moneyness", _grid(-0.5, 0.5, 11))),
        SweepDefinition("asian_basket_6m", "Asian basket, T = 0.5",
                        _asian_basket(0.5),
                        SweepConfig("moneyness", _grid(-0.3, 0.3, 13))),
        SweepDefinition("asian_basket_1y", "Asian basket, T = 1",
                        _asian_basket(1.0),
                        SweepConfig("moneyness", _grid(-0.3, 0.3, 13))),
        SweepDefinition("asian_basket_5y", "Asian basket, T = 5",
                        _asian_basket(5.0),
                        SweepConfig("moneyness", _grid(-0.5, 0.5, 11))),
        SweepDefinition("dividends_10y", "Semi-annual dividends, T = 10",
                        _DIVIDENDS_10Y,
                        SweepConfig("strikes", _grid(50.0, 150.0, 11))),
    )
}


def get_table(table_id):
    """Return a built-in TableDefinition."""
    if table_id not in TABLES:
        raise exceptions.ArgumentError(
            f"unknown table '{table_id}', expected one of "
            f"{', '.join(TABLES)}"
        )
    return TABLES[table_id]


def get_sweep(sweep_id):
    """Return a built-in SweepDefinition."""
    if sweep_id not in SWEEPS:
        raise exceptions.ArgumentError(
            f"unknown sweep '{sweep_id}', expected one of "
            f"{', '.join(SWEEPS)}"
        )
    return SWEEPS[sweep_id]


def _row_instrument(sections, overrides):
    overrides = dict(overrides)
    moneyness = overrides.pop("moneyness", None)
    merged = {name: dict(options) for name, options in sections.items()}
    merged["instrument"].update(overrides)
    instrument = instrument_from_dict(merged)
    if moneyness is not None:
        instrument = with_strike(
            instrument, (1.0 + moneyness) * moneyness_base(instrument)
        )
    return instrument


def _expansion_price(basket, method, label):
    try:
        return price_basket(basket, method).price
    except exceptions.BasketexpError as err:
        logger.warning("%s %s: %s", label, method, err)
        return f"error: {err}"


def bp_error(price, reference, amount):
    """Return (price - reference) / amount in basis points."""
    return (price - reference) / amount * 1e4


def _footer(methods, rows):
    """Return RMSE and MAE rows of each method against the MC column."""
    rmse, mae = {}, {}
    for method in methods:
        errors = [
            row[method] - row["MC"] for row in rows
            if isinstance(row.get(method), float) and "MC" in row
        ]
        if errors:
            rmse[method] = math.sqrt(math.fsum(e * e for e in errors)
                                     / len(errors))
            mae[method] = max(abs(e) for e in errors)
    return [("RMSE", rmse), ("MAE", mae)]


def _check_references(definition, rows):
    """Return the cells differing from the published values, logged."""
    mismatches = []
    for method, printed in (definition.references or {}).items():
        column = method
        if definition.error_unit == BASIS_POINTS:
            column = f"{method}_bp"
        for index, (row, reference) in enumerate(zip(rows, printed)):
            value = row.get(column)
            if not isinstance(value, float):
                continue
            tolerance = definition.tolerance
            if method == "MC":
                tolerance += 4.0 * row["MC_SE"]
            if abs(value - reference) > tolerance:
                mismatches.append(Mismatch(index, column, value, reference))
                logger.warning(
                    "%s row %d: %s = %.6f differs from published %.6f",
                    definition.table_id, index, column, value, reference,
                )
    return mismatches


def evaluate_table(definition, mc_config=None):
    """Return the TableResult of a table, without MC when mc_config is None.

    Basis point tables need the MC column, they only report prices without
    it.
    """
    methods = list(definition.methods)
    header = list(definition.rows[0].labels) + methods
    if mc_config is not None:
        header += ["MC", "MC_SE"]
        if definition.error_unit == BASIS_POINTS:
            header += [f"{method}_bp" for method in methods]
    rows = []
    for index, table_row in enumerate(definition.rows):
        label = f"{definition.table_id} row {index}"
        instrument = _row_instrument(definition.instrument,
                                     table_row.overrides)
        basket = to_basket(instrument)
        row = dict(table_row.labels)
        for method in methods:
            row[method] = _expansion_price(basket, method, label)
        if mc_config is not None:
            result = price_mc(basket, mc_config)
            row["MC"] = result.price
            row["MC_SE"] = result.std_error
            if definition.error_unit == BASIS_POINTS:
                amount = notional(instrument)
                for method in methods:
                    if isinstance(row[method], float):
                        row[f"{method}_bp"] = bp_error(row[method],
                                                       row["MC"], amount)
        logger.info("%s: %s", label, row)
        rows.append(row)
    footer = _footer(methods, rows) if mc_config is not None else []
    return TableResult(header, rows, footer,
                       _check_references(definition, rows))


def sweep_strikes(instrument, sweep):
    """Return [(moneyness, strike)] of a SweepConfig."""
    base = moneyness_base(instrument)
    if sweep.variable == "moneyness":
        return [(m, (1.0 + m) * base) for m in sweep.values]
    return [(k / base - 1.0, k) for k in sweep.values]


def _same_draws(baskets):
    """Return True when the baskets only differ in their strike."""
    first = baskets[0]
    return all(
        np.array_equal(basket.weights, first.weights)
        and np.array_equal(basket.forwards, first.forwards)
        and np.array_equal(basket.covariance, first.covariance)
        and basket.eta == first.eta and basket.discount == first.discount
        for basket in baskets[1:]
    )


def _sweep_mc(baskets, mc_config):
    """Return the MC PriceResult of every basket on common draws."""
    if _same_draws(baskets):
        strikes = [basket.strike for basket in baskets]
        return price_mc_strikes(baskets[0], strikes, mc_config)
    # One seed and one covariance give the same normals for every basket
    return [price_mc(basket, mc_config) for basket in baskets]


def evaluate_sweep(instrument, sweep, methods, mc_config):
    """Return (header, rows) of expansion errors in bp against MC.

    Every strike is priced by MC on the same draws.
    """
    methods = [method for method in methods if method != "MC"]
    grid = sweep_strikes(instrument, sweep)
    baskets = [
        to_basket(with_strike(instrument, strike)) for _, strike in grid
    ]
    mc_results = _sweep_mc(baskets, mc_config)
    amount = notional(instrument)
    header = ["moneyness", "strike", "MC", "MC_SE"]
    for method in methods:
        header += [method, f"{method}_bp"]
    rows = []
    for (moneyness, strike), basket, mc_result in zip(
            grid, baskets, mc_results):
        row = {
            "moneyness": moneyness, "strike": strike,
            "MC": mc_result.price, "MC_SE": mc_result.std_error,
        }
        for method in methods:
            price = _expansion_price(basket, method, f"K = {strike:.4f}")
            row[method] = price
            if isinstance(price, float):
                row[f"{method}_bp"] = bp_error(price, mc_result.price,
                                               amount)
        rows.append(row)
    return header, rows
