"""Riemannian trust-region minimization on the oblique manifold OB(d, n).

The subproblem is solved by truncated conjugate gradients (Steihaug-Toint)
with the identity preconditioner. Retraction is column normalization and
the metric is the Frobenius inner product inherited from R^{d x n}.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .manifold import normalize_columns, project_tangent, riemannian_hessian_action

__all__ = ["TrustRegionConfig", "SolveReport", "minimize", "gradient_descent_fallback"]

log = logging.getLogger(__name__)

_NEG_CURVATURE = "negative_curvature"
_EXCEEDED_TR = "exceeded_trust_region"
_LINEAR = "reached_target_linear"
_SUPERLINEAR = "reached_target_superlinear"
_MAX_INNER = "max_inner_iterations"
_MODEL_INCREASED = "model_increased"


@dataclass
class TrustRegionConfig:
    """Solver settings. ``None`` radii and inner-iteration caps are sized from (d, n)."""

    max_outer_iters: int = 200
    grad_tol: float = 1e-8
    initial_radius: float | None = None
    max_radius: float | None = None
    rho_accept: float = 0.1
    tcg_max_iters: int | None = None
    tcg_kappa: float = 0.1
    tcg_theta: float = 1.0
    stall_window: int = 10
    stall_rtol: float = 1e-12

    def __post_init__(self):
        if not 0.0 < self.rho_accept < 0.25:
            raise ValueError("rho_accept must lie in (0, 1/4)")
        for name in ("grad_tol", "tcg_kappa", "tcg_theta", "stall_rtol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("initial_radius", "max_radius"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be at least 1")

    def resolved(self, d, n):
        """Concrete (initial_radius, max_radius, tcg_max_iters) for a d x n problem."""
        max_radius = self.max_radius if self.max_radius is not None else math.sqrt(n)
        radius = self.initial_radius if self.initial_radius is not None else 0.1 * math.sqrt(n)
        tcg = self.tcg_max_iters if self.tcg_max_iters is not None else 3 * d * n
        return min(radius, max_radius), max_radius, tcg


@dataclass
class SolveReport:
    iterations: int
    final_objective: float
    final_grad_norm: float
    objective_trace: list = field(default_factory=list)
    termination: str = "max_iters"
    hessian_actions: int = 0

    def as_dict(self):
        return {
            "iterations": self.iterations,
            "final_objective": self.final_objective,
            "final_grad_norm": self.final_grad_norm,
            "termination": self.termination,
            "hessian_actions": self.hessian_actions,
            "objective_trace": list(self.objective_trace),
        }


def _inner(a, b):
    return float(np.vdot(a, b))


def _tcg(X, grad, hess, radius, max_iters, kappa, theta):
    """Truncated CG for min <g, eta> + 1/2 <eta, H eta> subject to ||eta|| <= radius."""
    eta = np.zeros_like(grad)
    Heta = np.zeros_like(grad)
    r = grad
    r_r = _inner(r, r)
    norm_r0 = math.sqrt(r_r)
    delta = -r
    e_Pe = 0.0
    e_Pd = 0.0
    d_Pd = r_r
    model = 0.0
    stop = _MAX_INNER
    n_hess = 0
    for j in range(max_iters):
        Hdelta = hess(delta)
        n_hess += 1
        d_Hd = _inner(delta, Hdelta)
        alpha = r_r / d_Hd if d_Hd != 0 else math.inf
        e_Pe_new = e_Pe + 2.0 * alpha * e_Pd + alpha * alpha * d_Pd
        if d_Hd <= 0 or e_Pe_new >= radius * radius:
            tau = (-e_Pd + math.sqrt(e_Pd * e_Pd + d_Pd * (radius * radius - e_Pe))) / d_Pd
            eta = eta + tau * delta
            Heta = Heta + tau * Hdelta
            stop = _NEG_CURVATURE if d_Hd <= 0 else _EXCEEDED_TR
            break
        e_Pe = e_Pe_new
        new_eta = eta + alpha * delta
        new_Heta = Heta + alpha * Hdelta
        new_model = _inner(new_eta, grad) + 0.5 * _inner(new_eta, new_Heta)
        if new_model >= model:
            stop = _MODEL_INCREASED
            break
        eta, Heta, model = new_eta, new_Heta, new_model
        r = project_tangent(X, r + alpha * Hdelta)
        r_r_old = r_r
        r_r = _inner(r, r)
        norm_r = math.sqrt(r_r)
        if norm_r <= norm_r0 * min(norm_r0**theta, kappa):
            stop = _LINEAR if kappa < norm_r0**theta else _SUPERLINEAR
            break
        beta = r_r / r_r_old
        delta = project_tangent(X, -r + beta * delta)
        e_Pd = beta * (e_Pd + alpha * d_Pd)
        d_Pd = r_r + beta * beta * d_Pd
    return eta, Heta, stop, n_hess


def _check_feasible(X):
    if X.ndim != 2 or np.any(np.abs(np.linalg.norm(X, axis=0) - 1.0) > 1e-12):
        raise ValueError("starting point must have unit-norm columns")


def minimize(objective, egrad, ehess_action, X0, cfg=None):
    """Minimize ``objective`` over OB(d, n) starting from ``X0``.

    ``egrad(X)`` and ``ehess_action(X, U)`` are the ambient gradient and
    Hessian action. Returns the final point and a :class:`SolveReport`;
    accepted iterates never increase the objective.
    """
    cfg = cfg or TrustRegionConfig()
    X = np.array(X0, dtype=float)
    _check_feasible(X)
    d, n = X.shape
    radius, max_radius, tcg_max = cfg.resolved(d, n)

    f = float(objective(X))
    eg = egrad(X)
    g = project_tangent(X, eg)
    gnorm = math.sqrt(_inner(g, g))
    trace = [f]
    termination = "max_iters"
    n_hess = 0
    it = 0
    for it in range(1, cfg.max_outer_iters + 1):
        if gnorm <= cfg.grad_tol:
            termination = "grad_tol"
            break
        Xk, egk = X, eg

        def hess(U, Xk=Xk, egk=egk):
            return riemannian_hessian_action(Xk, egk, ehess_action(Xk, U), U)

        eta, Heta, stop, nh = _tcg(X, g, hess, radius, tcg_max, cfg.tcg_kappa, cfg.tcg_theta)
        n_hess += nh
        model_dec = -(_inner(g, eta) + 0.5 * _inner(eta, Heta))
        if model_dec <= 0:
            # fall back to the Cauchy point along -g
            gHg = _inner(g, hess(g))
            n_hess += 1
            tau = 1.0 if gHg <= 0 else min(gnorm**3 / (radius * gHg), 1.0)
            eta = -tau * radius / gnorm * g
            Heta = None
            model_dec = tau * radius * gnorm - 0.5 * (tau * radius / gnorm) ** 2 * gHg
            stop = _EXCEEDED_TR
        X_new = normalize_columns(X + eta)
        f_new = float(objective(X_new))
        reg = max(1.0, abs(f)) * np.finfo(float).eps * 1e3
        rho = (f - f_new + reg) / (model_dec + reg)

        norm_eta = math.sqrt(_inner(eta, eta))
        if rho < 0.25:
            radius *= 0.25
        elif rho > 0.75 and stop in (_NEG_CURVATURE, _EXCEEDED_TR) and norm_eta >= 0.99 * radius:
            radius = min(2.0 * radius, max_radius)

        if rho > cfg.rho_accept and f_new <= f:
            X, f = X_new, f_new
            eg = egrad(X)
            g = project_tangent(X, eg)
            gnorm = math.sqrt(_inner(g, g))
            trace.append(f)
            w = cfg.stall_window
            if len(trace) > w and trace[-w - 1] - f <= cfg.stall_rtol * max(abs(f), 1e-300):
                termination = "stalled"
                break
        if radius < 1e-14:
            termination = "radius_collapse"
            break
        log.debug("rtr it=%d f=%.16g |g|=%.3e radius=%.3e rho=%.3f tcg=%s", it, f, gnorm, radius, rho, stop)
    else:
        if gnorm <= cfg.grad_tol:
            termination = "grad_tol"
    return X, SolveReport(it, f, gnorm, trace, termination, n_hess)


def gradient_descent_fallback(objective, egrad, X0, step_tol=1e-12, max_iters=5000, grad_tol=1e-8):
    """Projected-gradient descent with Armijo backtracking and normalization retraction.

    The first trial step of every iteration is the Barzilai-Borwein length
    from the previous pair of iterates; backtracking keeps the decrease
    monotone.
    """
    X = np.array(X0, dtype=float)
    _check_feasible(X)
    f = float(objective(X))
    g = project_tangent(X, egrad(X))
    gnorm = math.sqrt(_inner(g, g))
    trace = [f]
    step = 1.0
    termination = "max_iters"
    it = 0
    for it in range(1, max_iters + 1):
        if gnorm <= grad_tol:
            termination = "grad_tol"
            break
        accepted = False
        while step * gnorm >= step_tol:
            X_new = normalize_columns(X - step * g)
            f_new = float(objective(X_new))
            if f_new <= f - 1e-4 * step * gnorm * gnorm:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            termination = "step_tol"
            break
        g_new = project_tangent(X_new, egrad(X_new))
        s_vec = X_new - X
        y_vec = g_new - project_tangent(X_new, g)
        sy = _inner(s_vec, y_vec)
        step = _inner(s_vec, s_vec) / sy if sy > 0 else 2.0 * step
        X, f, g = X_new, f_new, g_new
        gnorm = math.sqrt(_inner(g, g))
        trace.append(f)
    else:
        if gnorm <= grad_tol:
            termination = "grad_tol"
    return X, SolveReport(it, f, gnorm, trace, termination)
