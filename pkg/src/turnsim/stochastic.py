"""Random-variate helpers: shifted Weibull draws and named seed streams.

All randomness flows through numpy Generators built from explicit seed
lists, so any run is reproducible from (run_seed,) alone and per-passenger
streams are independent of how many passengers exist.
"""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class WeibullParams:
    """Three-parameter (shifted) Weibull: shape alpha, scale beta, floor theta."""

    alpha: float
    beta: float
    theta: float

    def mean(self):
        return self.theta + self.beta * math.gamma(1.0 + 1.0 / self.alpha)

    def cdf(self, x):
        if x <= self.theta:
            return 0.0
        z = (x - self.theta) / self.beta
        return 1.0 - math.exp(-(z**self.alpha))


#: walk: seconds to cross one 0.8 m cell lengthwise (mean 0.58 s, about
#: 1.4 m/s); A/B: stowage effort profiles in seconds (slow/heavy vs
#: quick/light).
PRESETS = {
    "walk": WeibullParams(0.9, 0.4, 0.16),
    "A": WeibullParams(2.0, 6.5, 5.5),
    "B": WeibullParams(2.0, 6.5, 1.5),
}


def sample_weibull(rng, params):
    """One draw by inverse transform; never below theta, hits it at u=1."""
    u = 1.0 - rng.random()  # (0, 1]
    return params.theta + params.beta * (-math.log(u)) ** (1.0 / params.alpha)


def bernoulli(rng, p):
    """True with probability p."""
    return rng.random() < p


# Stream tags keep the three random decision groups of one run independent:
# reordering seats, shuffling the entry order, and per-passenger behaviour.
_ASSIGNMENT = 0
_ORDER = 1
_PAX = 2


def assignment_stream(run_seed):
    return np.random.default_rng([run_seed, _ASSIGNMENT])


def order_stream(run_seed):
    return np.random.default_rng([run_seed, _ORDER])


def pax_stream(run_seed, pax_index):
    return np.random.default_rng([run_seed, _PAX, pax_index])
