"""
Piecewise-constant term structures.

Rates, dividend yields and volatilities are step functions of time.  The
value on [breakpoints[k-1], breakpoints[k]) is values[k], values[0] applies
before the first breakpoint and values[-1] after the last one, so there is
always one more value than there are breakpoints.  All integrals are exact.
"""
import dataclasses
import math
import numpy as np
from . import exceptions


@dataclasses.dataclass(frozen=True)
class PiecewiseCurve:
    """Right-open step function of time in years."""

    breakpoints: tuple = ()
    values: tuple = (0.0,)

    def __post_init__(self):
        """Coerce to float tuples and check the invariants."""
        try:
            breakpoints = tuple(float(x) for x in np.atleast_1d(
                np.asarray(self.breakpoints, dtype=float)))
            values = tuple(float(x) for x in np.atleast_1d(
                np.asarray(self.values, dtype=float)))
        except (TypeError, ValueError) as err:
            raise exceptions.ArgumentError(f"curve: {err}") from err
        if len(values) != len(breakpoints) + 1:
            raise exceptions.ArgumentError(
                f"curve: expected {len(breakpoints) + 1} values for "
                f"{len(breakpoints)} breakpoints, got {len(values)}"
            )
        if not all(math.isfinite(x) for x in breakpoints + values):
            raise exceptions.ArgumentError("curve: non-finite entry")
        if any(b <= a for a, b in zip(breakpoints, breakpoints[1:])):
            raise exceptions.ArgumentError(
                "curve: breakpoints must be strictly increasing"
            )
        object.__setattr__(self, "breakpoints", breakpoints)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, value):
        """Return a curve equal to value at all times."""
        return cls((), (value,))

    def __call__(self, time):
        """Return the curve value at time."""
        index = np.searchsorted(self.breakpoints, time, side="right")
        return np.asarray(self.values)[index]

    def is_nonnegative(self):
        """Return True if every segment value is >= 0."""
        return min(self.values) >= 0.0


def volatility_curve(curve):
    """Return curve after checking it is usable as a volatility."""
    if not isinstance(curve, PiecewiseCurve):
        curve = PiecewiseCurve.constant(curve)
    if not curve.is_nonnegative():
        raise exceptions.ArgumentError("volatility curve must be >= 0")
    return curve


def _check_interval(start, stop):
    if not (math.isfinite(start) and math.isfinite(stop)):
        raise exceptions.ArgumentError(
            f"integration bounds must be finite: [{start}, {stop}]"
        )
    if start > stop:
        raise exceptions.ArgumentError(
            f"integration bounds reversed: {start} > {stop}"
        )


def _segments(start, stop, *curves):
    """Return (left edges, widths) of the merged grid over [start, stop]."""
    inner = [
        b for curve in curves for b in curve.breakpoints if start < b < stop
    ]
    edges = np.unique(np.array([start, stop] + inner, dtype=float))
    return edges[:-1], np.diff(edges)


def integrate(curve, start, stop):
    """Return the exact integral of curve over [start, stop]."""
    _check_interval(start, stop)
    if start == stop:
        return 0.0
    left, widths = _segments(start, stop, curve)
    return math.fsum(curve(left) * widths)


def integrate_product(curve1, curve2, start, stop):
    """Return the exact integral of curve1 * curve2 over [start, stop]."""
    _check_interval(start, stop)
    if start == stop:
        return 0.0
    left, widths = _segments(start, stop, curve1, curve2)
    return math.fsum(curve1(left) * curve2(left) * widths)


def growth(rate, yield_curve, start, stop):
    """Return the forward growth factor exp(int (r - q)) over [start, stop]."""
    return math.exp(
        integrate(rate, start, stop) - integrate(yield_curve, start, stop)
    )


def discount(rate, time):
    """Return the discount factor exp(-int_0^time r)."""
    return math.exp(-integrate(rate, 0.0, time))


def forward(spot, rate, yield_curve, time):
    """Return the forward price S(0) exp(int_0^t (r - q))."""
    if not spot > 0.0:
        raise exceptions.ArgumentError(f"spot must be > 0, got {spot}")
    if time < 0.0:
        raise exceptions.ArgumentError(f"time must be >= 0, got {time}")
    return spot * growth(rate, yield_curve, 0.0, time)
