"""Reconstruction of a continuous density from a reapproximated point set.

Every target point becomes the mean of a von Mises-Fisher component; all
components share one concentration ``lam`` and carry weight ``1/n``. The
concentration is the maximum-likelihood value for the source samples,
found by Newton's method safeguarded with bisection.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .manifold import fibonacci_sphere
from .mixture import DiracMixture
from .specfn import bessel_ratio, bessel_ratio_deriv, inv_bessel_ratio, vmf_log_norm

__all__ = [
    "VmfMixture",
    "MleState",
    "loglik",
    "loglik_derivs",
    "lambda_bounds",
    "fit_lambda",
    "reconstruct",
    "vmfm_logpdf",
    "hellinger_s2",
]

_R_MAX = 1.0 - 1e-12


@dataclass(frozen=True)
class VmfMixture:
    """Equally weighted vMF mixture with one shared concentration."""

    means: np.ndarray
    lam: float

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        if means.ndim != 2 or np.any(np.abs(np.linalg.norm(means, axis=0) - 1.0) > 1e-12):
            raise ValueError("means must be a (d, n) array of unit columns")
        if not self.lam > 0:
            raise ValueError("concentration must be positive")
        object.__setattr__(self, "means", means)

    @property
    def d(self):
        return self.means.shape[0]

    @property
    def n(self):
        return self.means.shape[1]

    @property
    def weights(self):
        return np.full(self.n, 1.0 / self.n)

    def logpdf(self, x):
        return vmfm_logpdf(self, x)


@dataclass
class MleState:
    lambda_min: float
    lambda_max: float
    lambda0: float
    iterates: list = field(default_factory=list)
    converged: bool = False
    steps: list = field(default_factory=list)  # "newton" or "bisect" per iteration


def _gram(target, source):
    if target.d != source.d:
        raise ValueError("dimension mismatch")
    return source.points.T @ target.points  # (m, n): source r vs target i


def _moments(lam, G, wr):
    """Source-weighted softmax mean and variance of the inner products."""
    z = lam * G
    z -= z.max(axis=1, keepdims=True)
    p = np.exp(z)
    p /= p.sum(axis=1, keepdims=True)
    mean_r = np.sum(p * G, axis=1)
    var_r = np.sum(p * (G - mean_r[:, None]) ** 2, axis=1)
    return float(wr @ mean_r), float(wr @ var_r)


def _derivs(lam, G, wr, d):
    m1, v = _moments(lam, G, wr)
    a = bessel_ratio(d, lam)
    ap = bessel_ratio_deriv(d, lam, limit_at_zero=True)
    return m1 - a, v - ap


def loglik(lam, target, source):
    """Source-weighted log-likelihood of the shared-concentration vMF mixture."""
    if not lam > 0:
        raise ValueError("concentration must be positive")
    G = _gram(target, source)
    lse = logsumexp(lam * G, axis=1)
    return vmf_log_norm(target.d, lam) - math.log(target.m) + float(source.weights @ lse)


def loglik_derivs(lam, target, source):
    """First and second derivatives of :func:`loglik` with respect to ``lam``."""
    if not lam > 0:
        raise ValueError("concentration must be positive")
    return _derivs(float(lam), _gram(target, source), source.weights, target.d)


def _inv(d, r):
    r = min(max(r, 0.0), _R_MAX)
    return inv_bessel_ratio(d, r) if r > 0 else 0.0


def _bounds_from_gram(G, wr, d):
    r_min = float(wr @ G.mean(axis=1))
    r_max = float(wr @ G.max(axis=1))
    lam_min = _inv(d, r_min)
    lam_max = max(_inv(d, r_max), lam_min)
    return lam_min, lam_max, 0.5 * (lam_min + lam_max)


def lambda_bounds(target, source):
    """``(lambda_min, lambda_max, lambda0)`` bracketing the likelihood maximizer.

    The lower bound inverts the Bessel ratio at the source-weighted average
    inner product with the target points, the upper bound at the weighted
    average of the largest inner product.
    """
    return _bounds_from_gram(_gram(target, source), source.weights, target.d)


def fit_lambda(target, source, tol=1e-8, max_iters=100):
    """Maximum-likelihood shared concentration. Returns ``(lam, MleState)``."""
    d = target.d
    G = _gram(target, source)
    wr = source.weights
    lo, hi, lam = _bounds_from_gram(G, wr, d)
    state = MleState(lo, hi, lam)
    if hi - lo <= 1e-12 * max(hi, 1.0):
        lp, _ = _derivs(lam, G, wr, d)
        state.iterates.append((lam, lp))
        state.converged = True
        return lam, state
    for _ in range(max_iters):
        lp, lpp = _derivs(lam, G, wr, d)
        state.iterates.append((lam, lp))
        if abs(lp) <= tol:
            state.converged = True
            break
        if lp > 0:
            lo = lam
        else:
            hi = lam
        cand = lam - lp / lpp if lpp != 0 else math.nan
        if lo < cand < hi:
            lam = cand
            state.steps.append("newton")
        else:
            lam = 0.5 * (lo + hi)
            state.steps.append("bisect")
        if hi - lo <= 1e-15 * hi:
            lp, _ = _derivs(lam, G, wr, d)
            state.iterates.append((lam, lp))
            state.converged = abs(lp) <= tol
            break
    return lam, state


def reconstruct(target, source, tol=1e-8):
    """Turn a reapproximated target set into a :class:`VmfMixture` fitted to ``source``."""
    lam, state = fit_lambda(target, source, tol=tol)
    return VmfMixture(target.points, max(lam, 1e-12)), state


def vmfm_logpdf(mix, x):
    """Log-density of ``mix`` at ``x`` (a unit vector or a ``(d, N)`` array of them)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[:, None] if single else x
    out = vmf_log_norm(mix.d, mix.lam) - math.log(mix.n) + logsumexp(mix.lam * (mix.means.T @ X), axis=0)
    return float(out[0]) if single else out


def hellinger_s2(f_log, g_log, lattice_size=20000):
    """Hellinger distance between two densities on S^2 by lattice quadrature.

    ``f_log`` and ``g_log`` are vectorized log-densities on ``(3, N)``
    arrays. The Bhattacharyya integral is divided by the quadrature masses
    of both densities so that lattice error cancels when ``f == g``.
    """
    pts = fibonacci_sphere(lattice_size)
    lf = np.asarray(f_log(pts), dtype=float)
    lg = np.asarray(g_log(pts), dtype=float)
    log_bc = logsumexp(0.5 * (lf + lg)) - 0.5 * logsumexp(lf) - 0.5 * logsumexp(lg)
    return math.sqrt(max(0.0, 1.0 - math.exp(log_bc)))


def mixture_from_points(points):
    return DiracMixture.uniform(points)
