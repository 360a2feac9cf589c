"""Sample paths of the gamma subordinator, the MLLP and its tempered variant.

Paths live on an equispaced grid ``t_i = i * horizon / n``, ``i = 1..n`` (``t_0 = 0``
is implicit).  Increments over each cell are exact draws, not discretisations:

* gamma:    ``G_i ~ gamma(rate=lam, shape=beta * dt)``
* MLLP:     ``Y_i = G_i**(1/alpha) * S_i`` with ``S_i`` standard stable
* tempered: ``Y_i = S_{alpha,mu}(G_i)`` by rejection with time scale ``G_i``

Pass ``n_paths`` to simulate a batch; values then have shape ``(n_paths, n_steps)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import randvar
from .errors import DomainError
from .randvar import RandomSource


@dataclass(frozen=True)
class ProcessParams:
    alpha: float
    lam: float
    beta: float = 1.0

    def __post_init__(self):
        # alpha = 1 is the gamma-process limit: analytic routines accept it,
        # the stable-based samplers reject it
        if not (0.0 < self.alpha <= 1.0):
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.lam > 0:
            raise DomainError(f"lambda must be positive, got {self.lam}")
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")


@dataclass(frozen=True)
class TemperedParams:
    base: ProcessParams
    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise DomainError(f"mu must be positive, got {self.mu}")

    @property
    def alpha(self) -> float:
        return self.base.alpha

    @property
    def lam(self) -> float:
        return self.base.lam

    @property
    def beta(self) -> float:
        return self.base.beta


@dataclass(frozen=True)
class TimeGrid:
    horizon: float
    n_steps: int

    def __post_init__(self):
        if not self.horizon > 0:
            raise DomainError(f"horizon must be positive, got {self.horizon}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise DomainError(f"n_steps must be a positive integer, got {self.n_steps}")

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    @property
    def times(self) -> np.ndarray:
        t = np.arange(1, self.n_steps + 1) * self.dt
        t[-1] = self.horizon
        return t


@dataclass
class SamplePath:
    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    @property
    def endpoint(self):
        return self.values[..., -1]

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values, axis=-1, prepend=0.0)


def _batch_shape(grid, n_paths):
    return (grid.n_steps,) if n_paths is None else (int(n_paths), grid.n_steps)


def _gamma_increments(src, params, grid, n_paths):
    return randvar.gamma_variate(src, params.lam, params.beta * grid.dt,
                                 size=_batch_shape(grid, n_paths))


def simulate_gamma_path(src: RandomSource, params: ProcessParams, grid: TimeGrid,
                        n_paths: int | None = None) -> SamplePath:
    g = _gamma_increments(src, params, grid, n_paths)
    return SamplePath(grid, np.cumsum(g, axis=-1))


def simulate_mllp_path(src: RandomSource, params: ProcessParams, grid: TimeGrid,
                       n_paths: int | None = None) -> SamplePath:
    g = _gamma_increments(src, params, grid, n_paths)
    s = randvar.stable_variate(src, params.alpha, size=g.shape)
    return SamplePath(grid, np.cumsum(g ** (1.0 / params.alpha) * s, axis=-1))


def simulate_tempered_mllp_path(src: RandomSource, params: TemperedParams, grid: TimeGrid,
                                n_paths: int | None = None) -> SamplePath:
    randvar._check_alpha(params.alpha)
    g = _gamma_increments(src, params.base, grid, n_paths)
    y, _ = randvar._tempered_stable(src, params.alpha, params.mu, g)
    return SamplePath(grid, np.cumsum(y.reshape(g.shape), axis=-1))


def sample_mllp(src: RandomSource, params: ProcessParams, t: float, size: int) -> np.ndarray:
    """Endpoint draws M(t): the single-cell fast route for marginal checks."""
    return simulate_mllp_path(src, params, TimeGrid(t, 1), n_paths=size).endpoint


def sample_tempered_mllp(src: RandomSource, params: TemperedParams, t: float,
                         size: int) -> np.ndarray:
    return simulate_tempered_mllp_path(src, params, TimeGrid(t, 1), n_paths=size).endpoint


def simulate_nb_subordinated(src: RandomSource, params: ProcessParams, c: float,
                             n_samples: int) -> np.ndarray:
    """Draws of M(N_{1/c}(1)) where N_p(t) = t + NB_p(t).

    The random clock enters the gamma shape directly: one gamma draw of shape
    ``beta * (1 + J)`` with ``J ~ NB(1, 1/c)``, then the stable scaling.
    """
    if not c > 1:
        raise DomainError(f"c must exceed 1, got {c}")
    j = randvar.negbin_variate(src, 1.0, 1.0 / c, size=n_samples)
    g = randvar.gamma_variate(src, params.lam, params.beta * (1.0 + j))
    s = randvar.stable_variate(src, params.alpha, size=n_samples)
    return g ** (1.0 / params.alpha) * s
