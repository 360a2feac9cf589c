"""Seedable random variates: uniform, exponential, gamma, stable, tempered stable,
Mittag-Leffler, Poisson and negative binomial.

Every variate is derived from :class:`RandomSource`, a Philox4x64 counter-based
bit stream (numpy's ``Philox`` bit generator seeded with the 64-bit seed).  Each
uniform uses the top 53 bits of one raw 64-bit word, mapped to ``(k + 0.5) / 2**53``
so the value is never 0 or 1.  All samplers accept ``size`` and are vectorised;
with ``size=None`` they return a Python scalar.

Schemes
-------
gamma
    Marsaglia-Tsang squeeze/rejection for shape >= 1 with normals from Box-Muller.
    For shape < 1 a gamma(shape + 1) draw is boosted by ``U**(1/shape)``.
    Both branches are exact.  For very small shapes the boosted value can
    underflow to 0.0 in double precision (the true variate is positive but below
    the smallest double).
stable
    Kanter's product form with U uniform and W standard exponential,
    ``S = sin(a pi U) sin((1-a) pi U)**((1-a)/a) / sin(pi U)**(1/a) * W**(-(1-a)/a)``,
    so that ``E exp(-u S) = exp(-u**a)``.
tempered stable
    Rejection from the scaled stable proposal with acceptance ``exp(-mu S)``.
    The time scale is first split into ``m = ceil(t mu**a)`` equal pieces summed
    afterwards, so every proposal is accepted with probability at least ``exp(-1)``.
Poisson
    Sequential inversion for means below 10, Hoermann's PTRS transformed
    rejection otherwise.
negative binomial
    Gamma-Poisson mixture.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, EfficiencyWarning

_TWO_M53 = 2.0 ** -53
_POISSON_INVERSION_MAX = 10.0
_EFFICIENCY_FLOOR = 1e-6
_CANDIDATE_BUDGET = 1 << 20  # cap on tempered-stable candidates per rejection round


def derive_seed(seed: int, *key: int) -> int:
    """Deterministic 64-bit child seed for ``(seed, *key)``; used to split work."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(k) for k in key]])
    return int(ss.generate_state(1, np.uint64)[0])


class RandomSource:
    """Single-owner uniform stream; equal seeds give bit-identical streams."""

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed < 2 ** 64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = seed
        self._bits = np.random.Philox(seed)

    def __repr__(self):
        return f"RandomSource(seed={self.seed})"

    def uniform01(self, size=None):
        n = 1 if size is None else int(np.prod(size))
        raw = self._bits.random_raw(n)
        u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53
        if size is None:
            return float(u[0])
        return u.reshape(size)

    def spawn(self, n: int) -> list["RandomSource"]:
        """Independent child sources, deterministic in (seed, index)."""
        return [RandomSource(derive_seed(self.seed, i)) for i in range(n)]


def _size_shape(size):
    if size is None:
        return ()
    return (int(size),) if np.ndim(size) == 0 else tuple(int(v) for v in size)


def _as_scalar(x, size):
    return float(x) if size is None else x


def _check_positive(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(arr > 0) or not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")
    return arr


def _check_alpha(alpha):
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def uniform01(src: RandomSource, size=None):
    return src.uniform01(size)


def exponential(src: RandomSource, rate, size=None):
    """|ln U| / rate."""
    rate = _check_positive("rate", rate)
    u = src.uniform01(size)
    return -np.log(u) / rate if size is not None else float(-math.log(u) / rate)


def standard_normal(src: RandomSource, size):
    """Box-Muller normals; both members of each pair are used."""
    n = int(np.prod(size))
    m = (n + 1) // 2
    u1 = src.uniform01(m)
    u2 = src.uniform01(m)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([r * np.cos(2 * np.pi * u2), r * np.sin(2 * np.pi * u2)])[:n]
    return z.reshape(size)


def _gamma_unit(src, shape):
    """Unit-rate gamma draws for a flat array of shapes (Marsaglia-Tsang + boost)."""
    shape = np.asarray(shape, dtype=float)
    n = shape.size
    boost = shape < 1.0
    a = np.where(boost, shape + 1.0, shape)
    d = a - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    out = np.empty(n)
    pending = np.arange(n)
    while pending.size:
        m = pending.size
        x = standard_normal(src, m)
        u = src.uniform01(m)
        dp, cp = d[pending], c[pending]
        v = (1.0 + cp * x) ** 3
        with np.errstate(invalid="ignore", divide="ignore"):
            ok = (v > 0) & (np.log(u) < 0.5 * x * x + dp - dp * v + dp * np.log(v))
        out[pending[ok]] = dp[ok] * v[ok]
        pending = pending[~ok]
    if boost.any():
        nb = int(boost.sum())
        u = src.uniform01(nb)
        out[boost] *= np.exp(np.log(u) / shape[boost])
    return out


def gamma_variate(src: RandomSource, rate, shape, size=None):
    """Gamma draws with density rate**shape x**(shape-1) exp(-rate x) / Gamma(shape).

    ``rate`` and ``shape`` broadcast against ``size``.
    """
    rate = _check_positive("rate", rate)
    shape = _check_positive("shape", shape)
    out_shape = np.broadcast_shapes(rate.shape, shape.shape, () if size is None else _size_shape(size))
    shp = np.broadcast_to(shape, out_shape).ravel()
    g = _gamma_unit(src, shp).reshape(out_shape) / rate
    if size is None and g.ndim == 0:
        return float(g)
    return g


def _kanter(alpha, u, w):
    one_m = 1.0 - alpha
    return (np.sin(alpha * np.pi * u)
            * np.sin(one_m * np.pi * u) ** (one_m / alpha)
            / np.sin(np.pi * u) ** (1.0 / alpha)
            * w ** (-one_m / alpha))


def stable_variate(src: RandomSource, alpha: float, size=None):
    """Standard positive alpha-stable draw with Laplace transform exp(-u**alpha)."""
    _check_alpha(alpha)
    u = src.uniform01(size)
    w = -np.log(src.uniform01(size))
    s = _kanter(alpha, np.asarray(u), np.asarray(w))
    return _as_scalar(s, size)


@dataclass(frozen=True)
class RejectionStats:
    proposals: int
    accepted: int

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposals if self.proposals else 1.0


def _tempered_stable(src, alpha, mu, t_scale, split=True):
    """Tempered stable draws for a flat array of time scales (zeros map to 0)."""
    t_scale = np.asarray(t_scale, dtype=float).ravel()
    n = t_scale.size
    mu_a = mu ** alpha
    if split:
        pieces = np.maximum(1, np.ceil(t_scale * mu_a)).astype(np.int64)
    else:
        pieces = np.ones(n, dtype=np.int64)
        worst = math.exp(-float(t_scale.max(initial=0.0)) * mu_a)
        if worst < _EFFICIENCY_FLOOR:
            warnings.warn(f"tempered stable acceptance probability down to {worst:.2e}",
                          EfficiencyWarning, stacklevel=3)
    owner = np.repeat(np.arange(n), pieces)
    scale = (t_scale / pieces)[owner] ** (1.0 / alpha)
    vals = np.empty(owner.size)
    pending = np.arange(owner.size)
    proposals = 0
    rate = 1.0  # running acceptance estimate; sets candidates per pending piece
    while pending.size:
        m = pending.size
        per = int(min(max(1.0, 1.0 / rate), max(1, _CANDIDATE_BUDGET // m)))
        shape = (m, per)
        s = scale[pending][:, None] * _kanter(alpha, src.uniform01(shape), -np.log(src.uniform01(shape)))
        ok = np.log(src.uniform01(shape)) <= -mu * s
        hit = ok.any(axis=1)
        first = ok.argmax(axis=1)
        # count proposals up to and including the first acceptance
        proposals += int(np.where(hit, first + 1, per).sum())
        vals[pending[hit]] = s[hit, first[hit]]
        rate = max(hit.sum() / (m * per), 1e-9) if hit.any() else rate / 16.0
        pending = pending[~hit]
    out = np.bincount(owner, weights=vals, minlength=n)
    return out, RejectionStats(proposals, int(owner.size))


def tempered_stable_variate(src: RandomSource, alpha: float, mu: float, t_scale,
                            size=None, *, split: bool = True, return_stats: bool = False):
    """Draws of S_{alpha,mu}(t_scale), Laplace transform exp(-t((u+mu)**alpha - mu**alpha)).

    With ``split=False`` the whole time scale is proposed at once and an
    :class:`~mllp.errors.EfficiencyWarning` is issued when the acceptance
    probability ``exp(-t mu**alpha)`` drops below 1e-6.  ``return_stats=True``
    additionally returns the observed :class:`RejectionStats`.
    """
    _check_alpha(alpha)
    mu = float(_check_positive("mu", mu))
    t = _check_positive("t_scale", t_scale)
    out_shape = np.broadcast_shapes(t.shape, () if size is None else _size_shape(size))
    vals, stats = _tempered_stable(src, alpha, mu, np.broadcast_to(t, out_shape), split=split)
    vals = vals.reshape(out_shape)
    if size is None and vals.ndim == 0:
        vals = float(vals)
    return (vals, stats) if return_stats else vals


def ml_variate(src: RandomSource, alpha: float, lam: float, size=None):
    """Mittag-Leffler draw G**(1/alpha) S, G ~ exponential(lam), S standard stable.

    Laplace transform lam / (lam + u**alpha).
    """
    _check_alpha(alpha)
    g = exponential(src, lam, size)
    s = stable_variate(src, alpha, size)
    return np.asarray(g) ** (1.0 / alpha) * s if size is not None else g ** (1.0 / alpha) * s


def _poisson_inversion(src, lam):
    n = lam.size
    u = src.uniform01(n)
    k = np.zeros(n, dtype=np.int64)
    p = np.exp(-lam)
    cdf = p.copy()
    active = u > cdf
    while active.any():
        idx = np.flatnonzero(active)
        k[idx] += 1
        p[idx] *= lam[idx] / k[idx]
        cdf[idx] += p[idx]
        # guards against cdf stalling just below u through rounding
        active[idx] = (u[idx] > cdf[idx]) & (p[idx] > 0)
    return k


def _poisson_ptrs(src, lam):
    n = lam.size
    slam = np.sqrt(lam)
    loglam = np.log(lam)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    out = np.empty(n, dtype=np.int64)
    pending = np.arange(n)
    while pending.size:
        m = pending.size
        uu = src.uniform01(m) - 0.5
        v = src.uniform01(m)
        ap, bp, lp = a[pending], b[pending], lam[pending]
        us = 0.5 - np.abs(uu)
        k = np.floor((2.0 * ap / us + bp) * uu + lp + 0.43)
        quick = (us >= 0.07) & (v <= vr[pending])
        reject = (k < 0) | ((us < 0.013) & (v > us))
        with np.errstate(invalid="ignore", divide="ignore"):
            lhs = np.log(v) + np.log(inv_alpha[pending]) - np.log(ap / (us * us) + bp)
            rhs = -lp + k * loglam[pending] - special.gammaln(k + 1.0)
        ok = quick | (~reject & (lhs <= rhs))
        out[pending[ok]] = k[ok].astype(np.int64)
        pending = pending[~ok]
    return out


def poisson_variate(src: RandomSource, mean, size=None):
    """Poisson draws; ``mean`` may be an array (zeros give 0)."""
    mean = np.asarray(mean, dtype=float)
    if np.any(mean < 0) or not np.all(np.isfinite(mean)):
        raise DomainError("Poisson mean must be finite and nonnegative")
    out_shape = np.broadcast_shapes(mean.shape, () if size is None else _size_shape(size))
    lam = np.broadcast_to(mean, out_shape).ravel()
    out = np.zeros(lam.size, dtype=np.int64)
    small = (lam > 0) & (lam < _POISSON_INVERSION_MAX)
    large = lam >= _POISSON_INVERSION_MAX
    if small.any():
        out[small] = _poisson_inversion(src, lam[small])
    if large.any():
        out[large] = _poisson_ptrs(src, lam[large])
    out = out.reshape(out_shape)
    return int(out) if (size is None and out.ndim == 0) else out


def negbin_variate(src: RandomSource, t_shape: float, p: float, size=None):
    """NB draws with P(J=j) = C(t+j-1, j) p**t (1-p)**j, via gamma-Poisson mixing."""
    t_shape = float(_check_positive("t_shape", t_shape))
    if not (0.0 < p < 1.0):
        raise DomainError(f"p must lie in (0, 1), got {p}")
    rate = p / (1.0 - p)
    lam = gamma_variate(src, rate, t_shape, size=1 if size is None else size)
    j = poisson_variate(src, lam)
    return int(np.asarray(j).ravel()[0]) if size is None else j
