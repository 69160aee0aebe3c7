"""Monte Carlo comparison of the reapproximation filter with a particle filter
on a random walk over S^2 observed in spherical coordinates.

System: ``x_{t+1} = (x_t + w_t) / ||x_t + w_t||`` with ``w_t`` drawn from a
fixed seven-component vMF mixture. Measurement: azimuth and elevation of
``x_t`` plus white Gaussian noise.

Every random stream is derived from ``SimConfig.seed`` and a purpose path,
and the truth trajectory of run ``r`` depends only on ``(seed, r)``, so all
methods see the same trajectories and measurements.
"""

import logging
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import hrdf
from .manifold import sample_vmf
from .mixture import DiracMixture
from .reapprox import ReapproxConfig, hdmr
from .rng import derive_seed, make_rng
from .specfn import vmf_log_norm

__all__ = [
    "SimConfig",
    "RunResult",
    "NOISE_MEANS",
    "NOISE_CONCENTRATIONS",
    "true_noise_logpdf",
    "sample_true_noise",
    "propagate",
    "measure",
    "meas_loglik",
    "arc_error",
    "simulate_truth",
    "noise_dirac_set",
    "run_particle_filter",
    "run_hrdf",
    "benchmark",
    "results_table",
]

log = logging.getLogger(__name__)

_S5 = 1.0 / math.sqrt(5.0)
NOISE_MEANS = np.array([
    [0.0, 0.0, 1.0],
    [0.0, 2 * _S5, _S5],
    [0.0, -2 * _S5, _S5],
    [2 * _S5, 0.0, _S5],
    [-2 * _S5, 0.0, _S5],
    [0.0, _S5, 2 * _S5],
    [0.0, -_S5, 2 * _S5],
]).T
NOISE_CONCENTRATIONS = np.array([5.0, 30.0, 30.0, 30.0, 30.0, 5.0, 5.0])

FULL_SCALE_N_W = (30, 50, 100, 200, 300, 500, 1000)


@dataclass
class SimConfig:
    num_runs: int = 200
    num_steps: int = 30
    meas_noise_var: float = 0.01
    n_posterior: int = 5
    n_w_list: list = field(default_factory=lambda: [30, 100, 200, 300])
    pf_particles_list: list = field(default_factory=lambda: [100, 200, 500, 1000])
    seed: int = 0
    source_size: int = 20000
    init_concentration: float = 5.0
    workers: int = 1

    def __post_init__(self):
        errors = self.validation_errors()
        if errors:
            raise ValueError("invalid SimConfig: " + "; ".join(errors))

    def validation_errors(self):
        errs = []
        for name in ("num_runs", "num_steps", "n_posterior", "source_size", "workers"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
                errs.append(f"{name} must be a positive integer, got {v!r}")
        for name in ("meas_noise_var", "init_concentration"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
                errs.append(f"{name} must be positive, got {v!r}")
        for name in ("n_w_list", "pf_particles_list"):
            v = getattr(self, name)
            if not isinstance(v, (list, tuple)) or not all(
                    isinstance(k, (int, np.integer)) and not isinstance(k, bool) and k >= 1 for k in v):
                errs.append(f"{name} must be a list of positive integers, got {v!r}")
        if not isinstance(self.seed, (int, np.integer)) or isinstance(self.seed, bool) or self.seed < 0:
            errs.append(f"seed must be a nonnegative integer, got {self.seed!r}")
        return errs

    @classmethod
    def full_scale(cls, **overrides):
        """5000 runs over the full list of noise set sizes."""
        base = dict(num_runs=5000, n_w_list=list(FULL_SCALE_N_W), pf_particles_list=[30, 100, 300, 1000, 3000])
        base.update(overrides)
        return cls(**base)


@dataclass
class RunResult:
    method: str
    samples: int
    rmse_final_rad: float
    mean_runtime_ms_per_step: float
    per_run_errors: list
    per_step_errors: list = field(default_factory=list)  # runs x steps
    fallback_count: int = 0  # skipped updates (hrdf) or reinitializations (pf)

    def __post_init__(self):
        if not 0.0 <= self.rmse_final_rad <= math.pi:
            raise ValueError("rmse_final_rad must lie in [0, pi]")

    def as_dict(self):
        return asdict(self)


# ---- models -----------------------------------------------------------------

def true_noise_logpdf(w):
    """Log-density of the seven-component noise mixture at ``w`` (a unit 3-vector or ``(3, N)``)."""
    w = np.asarray(w, dtype=float)
    single = w.ndim == 1
    W = w[:, None] if single else w
    if W.shape[0] != 3:
        raise ValueError("the noise density lives on S^2")
    lognorm = np.array([vmf_log_norm(3, lam) for lam in NOISE_CONCENTRATIONS])
    comp = lognorm[:, None] + NOISE_CONCENTRATIONS[:, None] * (NOISE_MEANS.T @ W)
    out = logsumexp(comp, axis=0) - math.log(NOISE_CONCENTRATIONS.size)
    return float(out[0]) if single else out


def sample_true_noise(count, rng):
    """``(3, count)`` draws from the noise mixture; components picked uniformly."""
    k = NOISE_CONCENTRATIONS.size
    comp = rng.integers(k, size=count)
    out = np.empty((3, count))
    for j in range(k):
        idx = np.flatnonzero(comp == j)
        if idx.size:
            out[:, idx] = sample_vmf(3, NOISE_MEANS[:, j], NOISE_CONCENTRATIONS[j], idx.size, rng).points
    return out


def propagate(x, w):
    """Normalized sum ``(x + w) / ||x + w||``; works on vectors or matching ``(3, N)`` arrays."""
    s = np.asarray(x, dtype=float) + np.asarray(w, dtype=float)
    norms = np.linalg.norm(s, axis=0)
    if np.any(norms <= 1e-12):
        raise ValueError("state and noise are antipodal; the normalized sum is undefined")
    return s / norms


def _h(X):
    """Noise-free azimuth and elevation of the columns of ``X`` and a pole mask."""
    x1, x2, x3 = X
    rho = np.hypot(x1, x2)
    pole = np.abs(x1) + np.abs(x2) <= 1e-12
    az = np.where(pole, 0.0, np.arctan2(x2, x1))
    el = np.arctan2(x3, rho)
    return np.vstack([az, el]), pole


def measure(x, noise=None, return_flag=False):
    """Spherical coordinates ``[azimuth, elevation]`` of ``x`` plus additive ``noise``.

    At a pole the azimuth is set to 0; ``return_flag`` also returns whether
    that happened.
    """
    x = np.asarray(x, dtype=float)
    z, pole = _h(x[:, None])
    z = z[:, 0]
    if noise is not None:
        z = z + np.asarray(noise, dtype=float)
    return (z, bool(pole[0])) if return_flag else z


def _wrap(a):
    """Map angles to (-pi, pi]."""
    return a - 2.0 * math.pi * np.ceil((a - math.pi) / (2.0 * math.pi))


def meas_loglik(z, x, var):
    """Gaussian log-likelihood of measurement ``z`` given state(s) ``x``.

    The azimuth residual is wrapped to (-pi, pi] first, so shifting ``z`` by
    a full turn leaves the value unchanged.
    """
    if not var > 0:
        raise ValueError("measurement variance must be positive")
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[:, None] if single else x
    hz, _ = _h(X)
    r = np.asarray(z, dtype=float)[:, None] - hz
    r[0] = _wrap(r[0])
    out = -math.log(2.0 * math.pi * var) - 0.5 * np.sum(r * r, axis=0) / var
    return float(out[0]) if single else out


def arc_error(x, y):
    """Great-circle distance between unit vectors, in [0, pi]."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(math.atan2(np.linalg.norm(np.cross(x, y)), float(x @ y)))


# ---- simulation -------------------------------------------------------------

def simulate_truth(cfg, run):
    """Truth trajectory and measurements for run index ``run``.

    Returns ``(x0, X, Z)`` with ``X`` of shape ``(3, num_steps)`` and ``Z``
    of shape ``(2, num_steps)``; column ``t`` is the state after ``t + 1``
    transitions and its measurement.
    """
    rng = make_rng(cfg.seed, "truth", run)
    sd = math.sqrt(cfg.meas_noise_var)
    x = propagate(np.array([0.0, 0.0, 1.0]), sample_true_noise(1, rng)[:, 0])
    x0 = x
    X = np.empty((3, cfg.num_steps))
    Z = np.empty((2, cfg.num_steps))
    for t in range(cfg.num_steps):
        x = propagate(x, sample_true_noise(1, rng)[:, 0])
        X[:, t] = x
        Z[:, t] = measure(x, sd * rng.standard_normal(2))
    return x0, X, Z


def _initial_points(cfg, x0, count, run):
    rng = make_rng(cfg.seed, "filter-init", run)
    return sample_vmf(3, x0, cfg.init_concentration, count, rng).points


def _estimate_or_fallback(post):
    try:
        return hrdf.point_estimate(post)
    except ValueError:
        return post.points[:, int(np.argmax(post.weights))]


_NOISE_CACHE = {}


def noise_dirac_set(cfg, n_w):
    """Offline reapproximation of ``cfg.source_size`` noise samples to ``n_w`` points.

    Results are cached per ``(seed, source_size, n_w)`` within the process.
    """
    key = (cfg.seed, cfg.source_size, n_w)
    if key not in _NOISE_CACHE:
        rng = make_rng(cfg.seed, "noise-source")
        source = DiracMixture.uniform(sample_true_noise(cfg.source_size, rng))
        target, rep = hdmr(source, ReapproxConfig(n_w, seed=derive_seed(cfg.seed, "noise-reapprox", n_w),
                                                    compute_d3=False))
        log.info("noise set n_w=%d: %d iterations (%s)", n_w, rep.iterations, rep.termination)
        _NOISE_CACHE[key] = target
    return _NOISE_CACHE[key]


def _pf_run(cfg, num_particles, run):
    x0, X, Z = simulate_truth(cfg, run)
    rng = make_rng(cfg.seed, "pf", num_particles, run)
    P = _initial_points(cfg, x0, num_particles, run)
    N = num_particles
    errors = np.empty(cfg.num_steps)
    elapsed = 0.0
    reinit = 0
    for t in range(cfg.num_steps):
        t0 = time.perf_counter()
        P = propagate(P, sample_true_noise(N, rng))
        logw = meas_loglik(Z[:, t], P, cfg.meas_noise_var)
        total = logsumexp(logw)
        if not np.isfinite(total):
            reinit += 1
            w = np.full(N, 1.0 / N)
        else:
            w = np.exp(logw - total)
            w /= w.sum()
        est = P @ w
        norm = np.linalg.norm(est)
        est = est / norm if norm > 1e-9 else P[:, int(np.argmax(w))]
        # systematic resampling
        positions = (rng.random() + np.arange(N)) / N
        idx = np.minimum(np.searchsorted(np.cumsum(w), positions), N - 1)
        P = P[:, idx]
        elapsed += time.perf_counter() - t0
        errors[t] = arc_error(X[:, t], est)
    return errors, elapsed, reinit


def _hrdf_run(cfg, noise, run):
    x0, X, Z = simulate_truth(cfg, run)
    n = cfg.n_posterior
    n_w = noise.m
    sys_model = hrdf.SystemModel(propagate, noise)
    var = cfg.meas_noise_var
    meas = hrdf.MeasurementModel(lambda z, S: meas_loglik(z, S, var))
    flat = hrdf.MeasurementModel(lambda z, S: np.zeros(S.shape[1]))
    rcfg = ReapproxConfig(n, seed=derive_seed(cfg.seed, "hrdf", n_w, run))
    state = hrdf.FilterState(DiracMixture.uniform(_initial_points(cfg, x0, n, run)))
    errors = np.empty(cfg.num_steps)
    elapsed = 0.0
    skipped = 0
    for t in range(cfg.num_steps):
        t0 = time.perf_counter()
        try:
            state = hrdf.step(state, sys_model, meas, Z[:, t], rcfg)
        except hrdf.DegenerateUpdateError:
            skipped += 1
            state = hrdf.step(state, sys_model, flat, Z[:, t], rcfg)
        est = _estimate_or_fallback(state.posterior)
        elapsed += time.perf_counter() - t0
        errors[t] = arc_error(X[:, t], est)
    return errors, elapsed, skipped


def _collect(method, samples, cfg, outcomes):
    errs = np.array([o[0] for o in outcomes])
    final = errs[:, -1]
    rmse = float(np.sqrt(np.mean(final**2)))
    ms = 1e3 * sum(o[1] for o in outcomes) / (len(outcomes) * cfg.num_steps)
    count = int(sum(o[2] for o in outcomes))
    if count:
        what = "skipped degenerate updates" if method == "hrdf" else "weight-collapse reinitializations"
        warnings.warn(f"{method}({samples}): {count} {what}", RuntimeWarning, stacklevel=3)
    return RunResult(method, samples, rmse, ms, final.tolist(), errs.tolist(), count)


def _map(fn, args, workers):
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, *zip(*args)))
    return [fn(*a) for a in args]


def run_particle_filter(cfg, num_particles, seed=None):
    """Bootstrap particle filter that proposes from the exact noise mixture.

    ``seed`` overrides ``cfg.seed``. Errors are arc lengths between the
    truth and the normalized weighted particle mean.
    """
    if seed is not None:
        cfg = SimConfig(**{**asdict(cfg), "seed": seed})
    outcomes = _map(_pf_run, [(cfg, num_particles, r) for r in range(cfg.num_runs)], cfg.workers)
    return _collect("pf", num_particles, cfg, outcomes)


def run_hrdf(cfg, n_w, seed=None, noise=None):
    """Reapproximation filter with an ``n_w``-point offline noise set.

    ``noise`` may supply the noise Dirac mixture directly (for instance a
    single point); by default it is :func:`noise_dirac_set`.
    """
    if seed is not None:
        cfg = SimConfig(**{**asdict(cfg), "seed": seed})
    if noise is None:
        noise = noise_dirac_set(cfg, n_w)
    outcomes = _map(_hrdf_run, [(cfg, noise, r) for r in range(cfg.num_runs)], cfg.workers)
    return _collect("hrdf", noise.m, cfg, outcomes)


def results_table(results, cfg):
    """Rows with the columns method, samples, rmse_rad, runtime_ms_per_step, runs, steps, seed."""
    return [
        {
            "method": r.method,
            "samples": r.samples,
            "rmse_rad": r.rmse_final_rad,
            "runtime_ms_per_step": r.mean_runtime_ms_per_step,
            "runs": cfg.num_runs,
            "steps": cfg.num_steps,
            "seed": cfg.seed,
        }
        for r in results
    ]


def benchmark(cfg):
    """Run both filters over their sample-size lists.

    Returns ``(results, table, series)``: the :class:`RunResult` list, table
    rows (see :func:`results_table`) and per-method series keyed by
    ``samples``, ``rmse_rad`` and ``runtime_ms_per_step``.
    """
    results = []
    for n_w in cfg.n_w_list:
        results.append(run_hrdf(cfg, n_w))
        log.info("hrdf n_w=%d rmse=%.4f", n_w, results[-1].rmse_final_rad)
    for k in cfg.pf_particles_list:
        results.append(run_particle_filter(cfg, k))
        log.info("pf particles=%d rmse=%.4f", k, results[-1].rmse_final_rad)
    table = results_table(results, cfg)
    series = {}
    for row in table:
        s = series.setdefault(row["method"], {"samples": [], "rmse_rad": [], "runtime_ms_per_step": []})
        for k in s:
            s[k].append(row[k])
    return results, table, series
