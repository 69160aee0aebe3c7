"""Recursive Bayesian filter on S^{d-1} that keeps its posterior as a small,
equally weighted Dirac mixture.

One step: propagate every posterior point with every noise point, reweight
the products by the measurement likelihood, then reapproximate the weighted
set back to ``n`` points.
"""

import warnings
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from .hcvmd import HcvmdObjective, HcvmdParams
from .manifold import normalize_columns
from .mixture import DiracMixture
from .reapprox import hdmr, init_target
from .rng import derive_seed, make_rng

__all__ = [
    "FilterState",
    "SystemModel",
    "MeasurementModel",
    "DegenerateUpdateError",
    "predict",
    "update",
    "step",
    "point_estimate",
]


class DegenerateUpdateError(ValueError):
    """Every prior component has zero likelihood."""


@dataclass(frozen=True)
class FilterState:
    posterior: DiracMixture
    t: int = 0

    def __post_init__(self):
        w = self.posterior.weights
        if np.any(np.abs(w - 1.0 / w.size) > 1e-12):
            raise ValueError("filter posterior must be equally weighted")


@dataclass(frozen=True)
class SystemModel:
    """``transition(states, noise)`` maps ``(d, k)`` arrays column by column to unit vectors."""

    transition: Callable
    noise: DiracMixture


@dataclass(frozen=True)
class MeasurementModel:
    """``log_likelihood(z, states)`` returns one log-likelihood per column of ``states``."""

    log_likelihood: Callable


def predict(state, sys):
    """Cartesian-product propagation of posterior and noise points.

    Component ``i * n_w + k`` (zero-based) is ``a(x_i, w_k)``.
    """
    X = state.posterior.points
    W = sys.noise.points
    n, n_w = X.shape[1], W.shape[1]
    states = np.repeat(X, n_w, axis=1)
    noises = np.tile(W, (1, n))
    out = np.asarray(sys.transition(states, noises), dtype=float)
    norms = np.linalg.norm(out, axis=0)
    if np.any(np.abs(norms - 1.0) > 1e-9):
        warnings.warn("transition output drifted off the sphere; renormalizing", RuntimeWarning, stacklevel=2)
    out = normalize_columns(out)
    weights = np.outer(state.posterior.weights, sys.noise.weights).ravel()
    return DiracMixture(out, weights / weights.sum())


def update(prior, meas, z):
    """Bayes reweighting of ``prior`` by ``exp(log_likelihood)``, normalized in log space."""
    ll = np.asarray(meas.log_likelihood(z, prior.points), dtype=float).ravel()
    if ll.shape != (prior.m,):
        raise ValueError("log_likelihood must return one value per component")
    with np.errstate(divide="ignore"):
        logw = np.log(prior.weights) + ll
    total = logsumexp(logw)
    if not np.isfinite(total):
        raise DegenerateUpdateError("measurement has zero likelihood under every prior component")
    w = np.exp(logw - total)
    return DiracMixture(prior.points, w / w.sum())


def _resample(post, n, seed):
    rng = make_rng(seed, "hrdf-resample")
    support = int(np.count_nonzero(post.weights))
    idx = rng.choice(post.m, size=n, replace=n > support, p=post.weights)
    return DiracMixture.uniform(post.points[:, idx])


def step(state, sys, meas, z, cfg, return_report=False):
    """Advance the filter by one time step.

    Returns the new :class:`FilterState`, or ``(state, report)`` when
    ``return_report`` is set; ``report`` is ``None`` after a resampling
    fallback.

    The previous posterior is tried as a warm start next to the default
    initialization; the solver starts from whichever is closer to the new
    weighted posterior.
    """
    n = state.posterior.m
    if cfg.n_target != n:
        raise ValueError(f"cfg.n_target={cfg.n_target} but the posterior has {n} points")
    post = update(predict(state, sys), meas, z)
    step_seed = derive_seed(cfg.seed, "hrdf-step", state.t)
    cfg_t = replace(cfg, seed=step_seed, compute_d3=False)
    candidates = [cfg_t]
    if cfg.init != "user_provided":
        candidates.append(replace(cfg_t, init="user_provided", init_points=state.posterior.points))
    try:
        target, report = _best_start_hdmr(post, candidates)
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        warnings.warn(f"reapproximation failed ({exc}); resampling instead", RuntimeWarning, stacklevel=2)
        target, report = _resample(post, n, step_seed), None
    new_state = FilterState(target, state.t + 1)
    return (new_state, report) if return_report else new_state


def _best_start_hdmr(post, candidates):
    """Run the reapproximation from the candidate start with the lowest initial distance."""
    cfg0 = candidates[0]
    params = HcvmdParams.for_target(post.d, cfg0.n_target, cfg0.epsilon_override)
    obj = HcvmdObjective(post, params, cfg0.n_target, d3=0.0)
    best = min(candidates, key=lambda c: obj.value(init_target(post, c)))
    return hdmr(post, best)


def point_estimate(state):
    """Normalized weighted mean of the posterior points."""
    post = state.posterior if isinstance(state, FilterState) else state
    r = post.resultant()
    norm = np.linalg.norm(r)
    if norm <= 1e-9:
        raise ValueError("posterior resultant is near zero; the mean direction is undefined")
    return r / norm
