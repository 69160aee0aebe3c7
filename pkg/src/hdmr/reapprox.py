"""Dirac mixture reapproximation: compress a weighted source point set on
S^{d-1} into ``n`` equally weighted points by minimizing the HCvMD on the
oblique manifold."""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .hcvmd import HcvmdObjective, HcvmdParams
from .manifold import normalize_columns
from .mixture import DiracMixture
from .rng import make_rng
from .rtr import SolveReport, TrustRegionConfig, gradient_descent_fallback, minimize

__all__ = ["ReapproxConfig", "init_target", "hdmr"]

INIT_METHODS = ("weighted_subsample", "farthest_point", "user_provided")


@dataclass
class ReapproxConfig:
    n_target: int
    init: str = "weighted_subsample"
    seed: int = 0
    epsilon_override: float | None = None
    solver: TrustRegionConfig = field(default_factory=TrustRegionConfig)
    init_points: np.ndarray | None = None
    compute_d3: bool = True

    def __post_init__(self):
        if self.n_target < 1:
            raise ValueError("n_target must be at least 1")
        if self.init not in INIT_METHODS:
            raise ValueError(f"init must be one of {INIT_METHODS}, got {self.init!r}")
        if self.epsilon_override is not None and not self.epsilon_override > 2.0:
            raise ValueError("epsilon_override must exceed 2")
        if self.init == "user_provided" and self.init_points is None:
            raise ValueError("init='user_provided' needs init_points")


def _break_ties(X, rng):
    """Nudge exactly repeated columns apart; identical columns would stay glued together."""
    _, first = np.unique(np.round(X, 14), axis=1, return_index=True)
    if first.size == X.shape[1]:
        return X
    dup = np.setdiff1d(np.arange(X.shape[1]), first)
    X = X.copy()
    X[:, dup] += 1e-4 * rng.standard_normal((X.shape[0], dup.size))
    return normalize_columns(X)


def _farthest_point(points, weights, n):
    start = int(np.argmax(weights))
    chosen = [start]
    best = points.T @ points[:, start]  # max cosine to the chosen set
    for _ in range(1, n):
        nxt = int(np.argmin(best))
        chosen.append(nxt)
        best = np.maximum(best, points.T @ points[:, nxt])
    return np.array(chosen)


def init_target(source, cfg):
    """Starting configuration ``(d, n)`` for the reapproximation."""
    n, m = cfg.n_target, source.m
    rng = make_rng(cfg.seed, "hdmr-init")
    if cfg.init == "user_provided":
        X = normalize_columns(np.asarray(cfg.init_points, dtype=float))
        if X.shape != (source.d, n):
            raise ValueError(f"init_points has shape {X.shape}, expected {(source.d, n)}")
        return X
    if cfg.init == "farthest_point" and n <= m:
        return source.points[:, _farthest_point(source.points, source.weights, n)].copy()
    w = source.weights
    support = int(np.count_nonzero(w))
    # with fewer nonzero weights than targets, duplicates are unavoidable;
    # hdmr() already warns when n exceeds the source size
    replace = n > support
    idx = rng.choice(m, size=n, replace=replace, p=w)
    return _break_ties(source.points[:, idx].copy(), rng)


def _is_degenerate(source):
    ref = source.points[:, [int(np.argmax(source.weights))]]
    return bool(np.all(np.abs(source.points - ref) <= 1e-12))


def hdmr(source, cfg):
    """Reapproximate ``source`` by ``cfg.n_target`` equally weighted points.

    Returns ``(target, report)``. ``report.info`` carries the weighting
    parameter, the distance before and after, and the initialization used.
    """
    d, n = source.d, cfg.n_target
    if n > source.m:
        warnings.warn(f"n_target={n} is larger than the source size {source.m}", RuntimeWarning, stacklevel=2)
    params = HcvmdParams.for_target(d, n, cfg.epsilon_override)

    if _is_degenerate(source):
        pt = source.points[:, [int(np.argmax(source.weights))]]
        target = DiracMixture.uniform(np.repeat(pt, n, axis=1))
        report = SolveReport(0, 0.0, 0.0, [0.0], "degenerate_source")
        report.info = {"epsilon": params.epsilon, "init": cfg.init, "D_init": 0.0, "D_final": 0.0}
        return target, report

    obj = HcvmdObjective(source, params, n, d3=None if cfg.compute_d3 else 0.0)
    X0 = init_target(source, cfg)
    f0 = obj.value(X0)
    try:
        X, report = minimize(obj.value, obj.egrad, obj.ehess, X0, cfg.solver)
    except (FloatingPointError, np.linalg.LinAlgError) as exc:  # pragma: no cover - defensive
        warnings.warn(f"trust-region solve failed ({exc}); using gradient descent", RuntimeWarning, stacklevel=2)
        X, report = gradient_descent_fallback(obj.value, obj.egrad, X0)
    report.info = {
        "epsilon": params.epsilon,
        "init": cfg.init,
        "D_init": f0,
        "D_final": report.final_objective,
        "d3_included": cfg.compute_d3,
    }
    return DiracMixture.uniform(X), report
