"""Errors raised by basketexp."""


class BasketexpError(Exception):
    """Top level exception raised by basketexp functions."""


class ArgumentError(BasketexpError):
    """Invalid input to a pricing or curve function."""


class ProxyDomainError(BasketexpError):
    """Levy log-argument is not positive, the proxy is unusable."""


class DegenerateProxyError(BasketexpError):
    """Proxy variance vanishes while the basket variance does not."""


class DerivativeUndefinedError(BasketexpError):
    """Second or third strike derivative requested at zero variance."""


class NumericalFailureError(BasketexpError):
    """Expansion produced a non-finite intermediate."""


class FactorizationError(BasketexpError):
    """Covariance matrix is not positive semidefinite."""


class ReductionError(BasketexpError):
    """Instrument can't be reduced to a basket."""


class ConfigError(BasketexpError):
    """Malformed run configuration."""
