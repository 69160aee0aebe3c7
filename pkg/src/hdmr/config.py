"""Run configuration files (YAML or JSON) and their validation.

Recognized layout, with defaults:

    seed: 0
    reapprox:
      n_target: null          # required unless given on the command line
      init: weighted_subsample
      epsilon_override: null
      compute_d3: true
    solver:                   # trust-region settings
      max_outer_iters: 200
      grad_tol: 1.0e-8
      initial_radius: null    # 0.1 * sqrt(n)
      max_radius: null        # sqrt(n)
      rho_accept: 0.1
      tcg_max_iters: null     # 3 * d * n
      tcg_kappa: 0.1
      tcg_theta: 1.0
      stall_window: 10
      stall_rtol: 1.0e-12
    reconstruct:
      tol: 1.0e-8
      lattice_size: 20000
      reference: null         # {type: vmf | vmf_mixture | bingham | noise_mixture, ...}
    sim:                      # filter benchmark, see harness.SimConfig
      num_runs: 200
      ...

Unknown keys anywhere are errors. All problems are collected and reported
together.
"""

import copy
import dataclasses

import numpy as np
import yaml
from scipy.special import logsumexp

from .harness import NOISE_CONCENTRATIONS, NOISE_MEANS, SimConfig
from .reapprox import INIT_METHODS
from .rtr import TrustRegionConfig
from .specfn import vmf_log_norm

__all__ = ["ConfigError", "load_config", "resolve_config", "default_config", "reference_logpdf"]


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


def _fields(cls):
    return {f.name: f for f in dataclasses.fields(cls)}


def _dataclass_defaults(cls, skip=()):
    out = {}
    for name, f in _fields(cls).items():
        if name in skip:
            continue
        if f.default is not dataclasses.MISSING:
            out[name] = f.default
        else:
            out[name] = f.default_factory()
    return out


def default_config():
    return {
        "seed": 0,
        "reapprox": {"n_target": None, "init": "weighted_subsample", "epsilon_override": None, "compute_d3": True},
        "solver": _dataclass_defaults(TrustRegionConfig),
        "reconstruct": {"tol": 1e-8, "lattice_size": 20000, "reference": None},
        "sim": _dataclass_defaults(SimConfig, skip=("seed",)),
    }


REFERENCE_KEYS = {
    "vmf": {"type", "mean", "concentration"},
    "vmf_mixture": {"type", "means", "concentrations", "weights"},
    "bingham": {"type", "matrix"},
    "noise_mixture": {"type"},
}


def load_config(path):
    """Read a YAML/JSON config file into a plain dict (not yet validated)."""
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError([f"{path}: top level must be a mapping"])
    return data


def _merge(base, override, path, errors):
    for key, val in override.items():
        where = f"{path}{key}"
        if key not in base:
            errors.append(f"unknown key '{where}'")
            continue
        if isinstance(base[key], dict) and key != "reference":
            if not isinstance(val, dict):
                errors.append(f"'{where}' must be a mapping")
                continue
            _merge(base[key], val, where + ".", errors)
        else:
            base[key] = val


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _check_reference(ref, errors):
    if ref is None:
        return
    if not isinstance(ref, dict) or ref.get("type") not in REFERENCE_KEYS:
        errors.append(f"reconstruct.reference.type must be one of {sorted(REFERENCE_KEYS)}")
        return
    allowed = REFERENCE_KEYS[ref["type"]]
    for k in ref:
        if k not in allowed:
            errors.append(f"unknown key 'reconstruct.reference.{k}' for type {ref['type']}")
    required = allowed - {"weights"}
    for k in sorted(required - set(ref)):
        errors.append(f"reconstruct.reference.{k} is required for type {ref['type']}")


def resolve_config(user=None, base=None):
    """Merge ``user`` over ``base`` (the defaults) and validate. Returns the resolved dict."""
    cfg = copy.deepcopy(base) if base is not None else default_config()
    errors = []
    _merge(cfg, copy.deepcopy(user or {}), "", errors)

    if not _is_int(cfg["seed"]) or cfg["seed"] < 0:
        errors.append("seed must be a nonnegative integer")
    r = cfg["reapprox"]
    if r["n_target"] is not None and (not _is_int(r["n_target"]) or r["n_target"] < 1):
        errors.append("reapprox.n_target must be a positive integer")
    if r["init"] not in INIT_METHODS or r["init"] == "user_provided":
        errors.append(f"reapprox.init must be one of {[m for m in INIT_METHODS if m != 'user_provided']}")
    if r["epsilon_override"] is not None and (not _is_num(r["epsilon_override"]) or not r["epsilon_override"] > 2):
        errors.append("reapprox.epsilon_override must be a number greater than 2")
    if not isinstance(r["compute_d3"], bool):
        errors.append("reapprox.compute_d3 must be true or false")

    try:
        TrustRegionConfig(**cfg["solver"])
    except (TypeError, ValueError) as exc:
        errors.append(f"solver: {exc}")

    rc = cfg["reconstruct"]
    if not _is_num(rc["tol"]) or not rc["tol"] > 0:
        errors.append("reconstruct.tol must be positive")
    if not _is_int(rc["lattice_size"]) or rc["lattice_size"] < 100:
        errors.append("reconstruct.lattice_size must be an integer >= 100")
    _check_reference(rc["reference"], errors)

    sim = dict(cfg["sim"], seed=cfg["seed"] if _is_int(cfg["seed"]) else 0)
    errors.extend(f"sim: {e}" for e in SimConfig.validation_errors(_Probe(sim)))
    if errors:
        raise ConfigError(errors)
    return cfg


class _Probe:
    """Attribute view of a dict, so SimConfig's checks run without constructing it."""

    def __init__(self, d):
        self.__dict__.update(d)


def sim_config(cfg):
    return SimConfig(**cfg["sim"], seed=cfg["seed"])


def solver_config(cfg):
    return TrustRegionConfig(**cfg["solver"])


def reference_logpdf(ref):
    """Vectorized log-density on ``(d, N)`` arrays for a reference density description.

    Bingham densities are left unnormalized; the Hellinger routine
    normalizes by quadrature mass.
    """
    kind = ref["type"]
    if kind == "vmf":
        mu = np.asarray(ref["mean"], dtype=float)
        mu = mu / np.linalg.norm(mu)
        lam = float(ref["concentration"])
        return lambda X: vmf_log_norm(mu.size, lam) + lam * (mu @ X)
    if kind in ("vmf_mixture", "noise_mixture"):
        if kind == "noise_mixture":
            means, lams, w = NOISE_MEANS, NOISE_CONCENTRATIONS, None
        else:
            means = np.asarray(ref["means"], dtype=float).T
            lams = np.asarray(ref["concentrations"], dtype=float)
            w = ref.get("weights")
        means = means / np.linalg.norm(means, axis=0)
        k = means.shape[1]
        logw = np.log(np.full(k, 1.0 / k) if w is None else np.asarray(w, dtype=float) / np.sum(w))
        d = means.shape[0]
        lognorm = np.array([vmf_log_norm(d, lam) for lam in lams])

        def logpdf(X):
            return logsumexp((logw + lognorm)[:, None] + lams[:, None] * (means.T @ X), axis=0)

        return logpdf
    if kind == "bingham":
        C = np.asarray(ref["matrix"], dtype=float)
        return lambda X: np.einsum("ik,ij,jk->k", X, C, X)
    raise ConfigError([f"unknown reference type {kind!r}"])
