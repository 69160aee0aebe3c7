"""Reference computations that do not share code paths with the closed forms.

``hcvmd-unit`` evaluates the pair kernel by quadrature of its defining
integral; ``derivatives`` compares analytic gradients and Hessian actions
with central finite differences. Each suite returns a JSON-ready dict with
its inputs, tolerances, per-case values and an overall ``passed`` flag.
"""

import numpy as np

from .hcvmd import HcvmdParams, distance_parts, egrad_array, ehess_array, hcvmd_unit, hcvmd_unit_numeric
from .manifold import normalize_columns
from .rng import make_rng

__all__ = ["SUITES", "run_suite", "fd_gradient", "fd_hessian_action", "derivative_instance"]

UNIT_DELTAS = (-1.0, -0.5, 0.0, 0.5, 0.99, 1.0)
UNIT_CASES = [(3, 2.05), (3, 2.1), (3, 3.0), (4, 2.1), (4, 3.0), (5, 2.1)]
UNIT_TOL = 1e-6

GRAD_TOL = 1e-5
HESS_TOL = 1e-4
SYM_TOL = 1e-8


def _pair(delta, d):
    u = np.zeros(d)
    u[0] = 1.0
    v = np.zeros(d)
    v[0] = delta
    v[1] = np.sqrt(max(0.0, 1.0 - delta * delta))
    return u, v


def hcvmd_unit_suite():
    rows = []
    for d, eps in UNIT_CASES:
        params = HcvmdParams(d, eps)
        for delta in UNIT_DELTAS:
            u, v = _pair(delta, d)
            q_num = hcvmd_unit_numeric(u, v, params)
            q_closed = hcvmd_unit(delta, params)
            rows.append({
                "d": d, "epsilon": eps, "delta": delta,
                "Q_closed": q_closed, "Q_numeric": q_num,
                "rel_err": abs(q_closed - q_num) / abs(q_num),
            })
    return {
        "suite": "hcvmd-unit",
        "tolerance_rel": UNIT_TOL,
        "rows": rows,
        "max_rel_err": max(r["rel_err"] for r in rows),
        "passed": all(r["rel_err"] <= UNIT_TOL for r in rows),
    }


def fd_gradient(f, X, h=1e-6):
    """Central-difference gradient of scalar ``f`` over all entries of ``X``."""
    G = np.zeros_like(X)
    for idx in np.ndindex(X.shape):
        E = np.zeros_like(X)
        E[idx] = h
        G[idx] = (f(X + E) - f(X - E)) / (2.0 * h)
    return G


def fd_hessian_action(grad, X, U, h=1e-6):
    """Central difference of ``grad`` along ``U``."""
    return (grad(X + h * U) - grad(X - h * U)) / (2.0 * h)


def derivative_instance(k, seed=0):
    """Seeded instance ``k``: returns ``(X, wx, Y, wy, params)``."""
    rng = make_rng(seed, "derivative-instance", k)
    d = int(rng.choice([3, 4]))
    n = int(rng.integers(3, 9))
    m = int(rng.integers(20, 61))
    X = normalize_columns(rng.standard_normal((d, n)))
    Y = normalize_columns(rng.standard_normal((d, m)))
    wx = np.full(n, 1.0 / n)
    wy = rng.random(m) + 0.1
    wy /= wy.sum()
    eps = float(rng.choice([2.05, 2.2, 3.0]))
    return X, wx, Y, wy, HcvmdParams(d, eps)


def _rel(a, b):
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def derivatives_suite(count=20, seed=0):
    rows = []
    for k in range(count):
        X, wx, Y, wy, p = derivative_instance(k, seed)
        d3 = 0.0

        def f(Z):
            return distance_parts(Z, wx, Y, wy, p, d3=d3)[0]

        def g(Z):
            return egrad_array(Z, wx, Y, wy, p)

        rng = make_rng(seed, "derivative-directions", k)
        U = rng.standard_normal(X.shape)
        V = rng.standard_normal(X.shape)
        grad = g(X)
        HU = ehess_array(X, wx, Y, wy, p, U)
        HV = ehess_array(X, wx, Y, wy, p, V)
        vhu, uhv = float(np.vdot(V, HU)), float(np.vdot(U, HV))
        rows.append({
            "instance": k, "d": p.d, "n": X.shape[1], "m": Y.shape[1], "epsilon": p.epsilon,
            "grad_rel_err": _rel(grad, fd_gradient(f, X)),
            "hess_rel_err": _rel(HU, fd_hessian_action(g, X, U)),
            "sym_rel_err": abs(vhu - uhv) / max(abs(vhu), abs(uhv), 1e-300),
        })
    out = {
        "suite": "derivatives",
        "tolerances": {"grad_rel": GRAD_TOL, "hess_rel": HESS_TOL, "sym_rel": SYM_TOL},
        "rows": rows,
        "max_grad_rel_err": max(r["grad_rel_err"] for r in rows),
        "max_hess_rel_err": max(r["hess_rel_err"] for r in rows),
        "max_sym_rel_err": max(r["sym_rel_err"] for r in rows),
    }
    out["passed"] = (out["max_grad_rel_err"] <= GRAD_TOL and out["max_hess_rel_err"] <= HESS_TOL
                     and out["max_sym_rel_err"] <= SYM_TOL)
    return out


SUITES = {"hcvmd-unit": hcvmd_unit_suite, "derivatives": derivatives_suite}


def run_suite(name):
    if name not in SUITES:
        raise KeyError(f"unknown oracle suite {name!r}; available: {', '.join(sorted(SUITES))}")
    return SUITES[name]()
