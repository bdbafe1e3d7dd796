"""
Monte Carlo reference pricer for BasketSpec.

The terminal values of a basket are jointly lognormal, so they are sampled
exactly: S*_i = exp(-V_ii / 2 + (L z)_i) with L L^T = V.  Work is split into
blocks with their own seeds, spawned from the configured seed, and the block
results are reduced in block order.  The estimate therefore does not depend
on the number of worker threads.
"""
import collections
import concurrent.futures
import logging
import math
import numpy as np
from scipy import special
from scipy.stats import qmc
from . import exceptions
from .basket import PriceResult

logger = logging.getLogger(__name__)

PSEUDORANDOM = "pseudorandom"
SOBOL = "sobol"
SAMPLERS = (PSEUDORANDOM, SOBOL)

# Highest dimension supported by scipy's Sobol direction numbers
SOBOL_MAX_DIMENSION = 21201

# Eigenvalues below -EIGEN_TOLERANCE * ||V|| make V indefinite
EIGEN_TOLERANCE = 1e-12

McConfig = collections.namedtuple(
    "McConfig",
    ["paths", "seed", "sampler", "antithetic", "block_size", "workers",
     "max_qmc_dimension"],
    defaults=[0, PSEUDORANDOM, False, 8192, None, SOBOL_MAX_DIMENSION],
)

# Running (count, mean, sum of squared deviations) of one block, per strike
_Moments = collections.namedtuple("_Moments", ["count", "mean", "m2"])


def check_config(cfg):
    """Raise ArgumentError unless cfg is a usable McConfig."""
    if not isinstance(cfg.paths, (int, np.integer)) or cfg.paths < 2:
        raise exceptions.ArgumentError(
            f"paths must be an integer >= 2, got {cfg.paths}"
        )
    if cfg.sampler not in SAMPLERS:
        raise exceptions.ArgumentError(
            f"unknown sampler '{cfg.sampler}', expected one of "
            f"{', '.join(SAMPLERS)}"
        )
    if cfg.block_size < 2:
        raise exceptions.ArgumentError(
            f"block_size must be >= 2, got {cfg.block_size}"
        )
    if cfg.workers is not None and cfg.workers < 1:
        raise exceptions.ArgumentError(
            f"workers must be >= 1, got {cfg.workers}"
        )
    if cfg.seed < 0:
        raise exceptions.ArgumentError(f"seed must be >= 0, got {cfg.seed}")


def factor_psd(covariance):
    """Return L with L L^T = V for a symmetric positive semidefinite V.

    A Cholesky factor is returned when V is definite.  Otherwise the spectral
    factor Q sqrt(Lambda) is used, small negative eigenvalues are clipped and
    the columns of zero eigenvalues are dropped, so a rank r matrix has r
    columns.
    """
    covariance = np.asarray(covariance, dtype=float)
    if covariance.ndim != 2 or covariance.shape[0] != covariance.shape[1]:
        raise exceptions.ArgumentError(
            f"covariance must be square, got shape {covariance.shape}"
        )
    if not np.all(np.isfinite(covariance)):
        raise exceptions.ArgumentError("covariance must be finite")
    norm = np.linalg.norm(covariance)
    if np.max(np.abs(covariance - covariance.T), initial=0.0) > 1e-12 * norm:
        raise exceptions.ArgumentError("covariance must be symmetric")
    try:
        return np.linalg.cholesky(covariance)
    except np.linalg.LinAlgError:
        logger.debug("Cholesky failed, using the spectral factor")

    eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    if eigenvalues[0] < -EIGEN_TOLERANCE * norm:
        raise exceptions.FactorizationError(
            f"covariance is indefinite, eigenvalue {eigenvalues[0]:.6e}"
        )
    keep = eigenvalues > EIGEN_TOLERANCE * norm
    return eigenvectors[:, keep] * np.sqrt(eigenvalues[keep])


def _power_of_two(value, round_up):
    value = int(value)
    if round_up:
        return 1 << (value - 1).bit_length()
    return 1 << (value.bit_length() - 1)


def _block_lengths(cfg, sampler):
    """Return the number of paths of every block."""
    if sampler == SOBOL:
        # Scrambled replicates of a power of two points, at least two
        length = min(_power_of_two(cfg.block_size, False),
                     _power_of_two(math.ceil(cfg.paths / 2), True))
        length = max(2, length)
        count = max(2, math.ceil(cfg.paths / length))
        lengths = [length] * count
    else:
        count, remainder = divmod(cfg.paths, cfg.block_size)
        lengths = [cfg.block_size] * count + ([remainder] if remainder else [])
    if cfg.antithetic:
        lengths = [length + length % 2 for length in lengths]
    return lengths


def _normals(dimension, length, seed, sampler, antithetic):
    """Return the standard normal draws of one block, shape (length, d)."""
    rng = np.random.default_rng(seed)
    half = length // 2 if antithetic else length
    if sampler == SOBOL:
        engine = qmc.Sobol(dimension, scramble=True, seed=rng)
        uniforms = np.clip(engine.random(half), 1e-16, 1.0 - 1e-16)
        normals = special.ndtri(uniforms)
    else:
        normals = rng.standard_normal((half, dimension))
    if antithetic:
        # Pair k is rows k and half + k
        return np.concatenate([normals, -normals])
    return normals


def _normalized_values(factor, half_variance, normals):
    """Return S*_i = exp(-V_ii / 2 + (L z)_i) for each draw."""
    return np.exp(normals @ factor.T - half_variance)


def _sampler(cfg, dimension):
    if cfg.sampler == SOBOL and dimension > cfg.max_qmc_dimension:
        logger.warning(
            "dimension %d exceeds the Sobol maximum %d, "
            "falling back to pseudorandom draws",
            dimension, cfg.max_qmc_dimension,
        )
        return PSEUDORANDOM
    return cfg.sampler


class _Simulation:
    """Blocks of normalized terminal draws of one basket."""

    def __init__(self, spec, cfg):
        """Factor V and plan the blocks."""
        check_config(cfg)
        self.spec = spec
        self.cfg = cfg
        self.factor = factor_psd(spec.covariance)
        self.half_variance = 0.5 * np.diag(spec.covariance)
        self.dimension = self.factor.shape[1]
        self.sampler = _sampler(cfg, self.dimension)
        self.lengths = _block_lengths(cfg, self.sampler)
        self.seeds = np.random.SeedSequence(cfg.seed).spawn(len(self.lengths))

    @property
    def paths(self):
        """Return the number of simulated paths."""
        return sum(self.lengths)

    def draws(self, block):
        """Return the normalized terminal values of one block."""
        if self.dimension == 0:
            return np.ones((self.lengths[block], self.spec.size))
        normals = _normals(
            self.dimension, self.lengths[block], self.seeds[block],
            self.sampler, self.cfg.antithetic,
        )
        return _normalized_values(self.factor, self.half_variance, normals)

    def payoff_moments(self, block, strikes):
        """Return the _Moments of the undiscounted payoff per strike."""
        values = self.draws(block)
        spec = self.spec
        basket = values @ (spec.weights * spec.forwards)
        payoff = np.maximum(
            spec.eta * (basket[:, np.newaxis] - strikes[np.newaxis, :]), 0.0
        )
        if self.cfg.antithetic:
            half = payoff.shape[0] // 2
            payoff = 0.5 * (payoff[:half] + payoff[half:])
        mean = payoff.mean(axis=0)
        m2 = np.square(payoff - mean).sum(axis=0)
        return _Moments(payoff.shape[0], mean, m2)

    def map_blocks(self, function):
        """Return [function(block) ...] in block order."""
        blocks = range(len(self.lengths))
        if self.cfg.workers == 1 or len(self.lengths) == 1:
            return [function(block) for block in blocks]
        with concurrent.futures.ThreadPoolExecutor(
                max_workers=self.cfg.workers) as executor:
            return list(executor.map(function, blocks))


def _combine(moments):
    """Reduce block moments in order with the pairwise update formula."""
    count, mean, m2 = moments[0]
    for other in moments[1:]:
        total = count + other.count
        delta = other.mean - mean
        mean = mean + delta * other.count / total
        m2 = m2 + other.m2 + np.square(delta) * count * other.count / total
        count = total
    return count, mean, m2


def _estimates(simulation, strikes):
    """Return (mean, standard error) arrays of the undiscounted payoff."""
    moments = simulation.map_blocks(
        lambda block: simulation.payoff_moments(block, strikes)
    )
    if simulation.sampler == SOBOL:
        # Scrambled replicates are independent, the error is across blocks
        means = np.array([moment.mean for moment in moments])
        mean = means.mean(axis=0)
        error = means.std(axis=0, ddof=1) / math.sqrt(len(moments))
        return mean, error
    count, mean, m2 = _combine(moments)
    error = np.sqrt(m2 / (count - 1) / count) if count > 1 else 0.0 * mean
    return mean, error


def _diagnostics(simulation):
    return {
        "paths": simulation.paths,
        "sampler": simulation.sampler,
        "antithetic": bool(simulation.cfg.antithetic),
        "blocks": len(simulation.lengths),
        "dimension": simulation.dimension,
        "seed": simulation.cfg.seed,
    }


def price_mc_strikes(spec, strikes, cfg):
    """Return one PriceResult per strike, all on the same draws."""
    strikes = np.atleast_1d(np.asarray(strikes, dtype=float))
    if not np.all(np.isfinite(strikes)):
        raise exceptions.ArgumentError("strikes must be finite")
    simulation = _Simulation(spec, cfg)
    logger.info(
        "simulating %d paths of %d assets (%s, %d blocks)",
        simulation.paths, spec.size, simulation.sampler,
        len(simulation.lengths),
    )
    if simulation.dimension == 0:
        # Deterministic basket
        payoff = np.maximum(spec.eta * (spec.basket_forward - strikes), 0.0)
        mean, error = payoff, np.zeros_like(payoff)
    else:
        mean, error = _estimates(simulation, strikes)
    info = _diagnostics(simulation)
    return [
        PriceResult(
            spec.discount * float(value), dict(info),
            spec.discount * float(stderr),
        )
        for value, stderr in zip(mean, error)
    ]


def price_mc(spec, cfg):
    """Return the Monte Carlo PriceResult of spec, with its standard error."""
    return price_mc_strikes(spec, [spec.strike], cfg)[0]


def simulate_normalized(spec, cfg):
    """Return the normalized terminal values S*_i, shape (paths, n).

    Rows follow the block order of price_mc().  Each column has mean one.
    """
    simulation = _Simulation(spec, cfg)
    return np.concatenate(simulation.map_blocks(simulation.draws))
