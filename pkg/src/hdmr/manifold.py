"""Geometry of the unit sphere and of the oblique manifold OB(d, n), plus the
samplers and lattices used to build source Dirac mixtures.

Points on OB(d, n) are ``(d, n)`` arrays with unit-norm columns.
"""

import math
import warnings

import numpy as np

from .mixture import DiracMixture
from .rng import make_rng

__all__ = [
    "normalize_columns",
    "project_tangent",
    "riemannian_hessian_action",
    "sample_vmf",
    "sample_bingham",
    "sample_uniform",
    "fibonacci_sphere",
    "super_fibonacci",
    "sphere_lattice",
    "density_weighted_lattice",
    "random_rotation",
]

_GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0
# root of x^4 = x + 4, used by the super-Fibonacci spiral on S^3
_PSI = 1.533751168755204288118041


def normalize_columns(M):
    """Divide every column by its Euclidean norm (the OB(d, n) retraction)."""
    M = np.asarray(M, dtype=float)
    norms = np.linalg.norm(M, axis=0)
    if np.any(norms <= 1e-14):
        bad = np.flatnonzero(norms <= 1e-14).tolist()
        raise ValueError(f"cannot normalize degenerate columns {bad}")
    return M / norms


def project_tangent(X, G):
    """Remove from each column of ``G`` its component along the matching column of ``X``."""
    return G - X * np.einsum("ij,ij->j", X, G)


def riemannian_hessian_action(X, egrad, ehess_U, U):
    """Riemannian Hessian of a function on OB(d, n) applied to tangent ``U``.

    Combines the ambient Hessian action ``ehess_U`` with the per-column
    curvature term of the embedded sphere.
    """
    return project_tangent(X, ehess_U - U * np.einsum("ij,ij->j", X, egrad))


def random_rotation(d, rng):
    """Haar-distributed rotation matrix in SO(d)."""
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def sample_uniform(d, count, rng):
    """``(d, count)`` array of uniform directions."""
    return normalize_columns(rng.standard_normal((d, count)))


def _vmf_cosines(d, lam, count, rng):
    """Draw t = mu^T x for a vMF on S^{d-1}."""
    if lam == 0.0:
        if d == 3:
            return 2.0 * rng.random(count) - 1.0
        return sample_uniform(d, count, rng)[0]
    if d == 3:
        # exact inverse CDF of the cosine on S^2
        u = rng.random(count)
        return 1.0 + np.log(u + (1.0 - u) * np.exp(-2.0 * lam)) / lam
    # Wood (1994) rejection scheme
    dm1 = d - 1.0
    b = dm1 / (2.0 * lam + math.sqrt(4.0 * lam * lam + dm1 * dm1))
    x0 = (1.0 - b) / (1.0 + b)
    c = lam * x0 + dm1 * math.log(1.0 - x0 * x0)
    out = np.empty(0)
    while out.size < count:
        k = max(2 * (count - out.size), 64)
        z = rng.beta(dm1 / 2.0, dm1 / 2.0, size=k)
        w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z)
        u = rng.random(k)
        ok = lam * w + dm1 * np.log(1.0 - x0 * w) - c >= np.log(u)
        out = np.concatenate([out, w[ok]])
    return out[:count]


def sample_vmf(d, mu, lam, count, seed):
    """``count`` i.i.d. draws from vMF(mu, lam) as a uniformly weighted mixture.

    ``seed`` is either an integer or an existing ``numpy.random.Generator``.
    """
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (d,) or abs(np.linalg.norm(mu) - 1.0) > 1e-12:
        raise ValueError("mu must be a unit vector of length d")
    if lam < 0:
        raise ValueError("concentration must be nonnegative")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed, "vmf")
    t = _vmf_cosines(d, float(lam), count, rng)
    v = rng.standard_normal((d, count))
    v -= np.outer(mu, mu @ v)
    v /= np.linalg.norm(v, axis=0)
    x = np.outer(mu, t) + v * np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    return DiracMixture.uniform(normalize_columns(x))


def sample_bingham(d, C, count, seed):
    """Rejection sampler for the Bingham density ``exp(x^T C x)``.

    Proposals are uniform on the sphere and accepted with probability
    ``exp(x^T C x)``, which is at most one because ``C`` is negative
    semidefinite.
    """
    C = np.asarray(C, dtype=float)
    if C.shape != (d, d) or not np.allclose(C, C.T):
        raise ValueError("C must be a symmetric d x d matrix")
    if np.max(np.linalg.eigvalsh(C)) > 1e-12:
        raise ValueError("C must be negative semidefinite")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed, "bingham")
    chunks, have, tried, accepted = [], 0, 0, 0
    while have < count:
        k = max(4 * (count - have), 1024)
        x = sample_uniform(d, k, rng)
        logp = np.einsum("ik,ij,jk->k", x, C, x)
        ok = np.log(rng.random(k)) <= logp
        tried += k
        accepted += int(ok.sum())
        chunks.append(x[:, ok])
        have += int(ok.sum())
        if tried > 10000 and accepted / tried < 0.01:
            warnings.warn(f"Bingham acceptance rate {accepted / tried:.2%} is below 1%", RuntimeWarning)
            tried = -(10**18)  # warn once
    return DiracMixture.uniform(np.concatenate(chunks, axis=1)[:, :count])


def fibonacci_sphere(count):
    """Spherical Fibonacci lattice on S^2 as a ``(3, count)`` array."""
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    phi = 2.0 * math.pi * i / _GOLDEN
    r = np.sqrt(1.0 - z * z)
    return np.vstack([r * np.cos(phi), r * np.sin(phi), z])


def super_fibonacci(count):
    """Super-Fibonacci spiral on S^3 as a ``(4, count)`` array."""
    s = np.arange(count) + 0.5
    t = s / count
    r = np.sqrt(t)
    R = np.sqrt(1.0 - t)
    alpha = 2.0 * math.pi * s / math.sqrt(2.0)
    beta = 2.0 * math.pi * s / _PSI
    return np.vstack([r * np.sin(alpha), r * np.cos(alpha), R * np.sin(beta), R * np.cos(beta)])


def sphere_lattice(d, count):
    """Deterministic near-uniform lattice on S^{d-1} for d in {3, 4}."""
    if d == 3:
        return fibonacci_sphere(count)
    if d == 4:
        return super_fibonacci(count)
    raise ValueError("lattices are available for d = 3 and d = 4 only")


def sphere_area(d):
    """Surface area of S^{d-1}."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def density_weighted_lattice(d, density, count):
    """Lattice nodes weighted by ``density`` (a vectorized callable on ``(d, N)`` arrays)."""
    if count < 10:
        raise ValueError("count must be at least 10")
    pts = sphere_lattice(d, count)
    w = np.asarray(density(pts), dtype=float).ravel()
    if w.shape != (count,) or np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("density must return finite nonnegative values, one per node")
    total = w.sum()
    if total <= 0.0:
        raise ValueError("density vanishes on every lattice node")
    return DiracMixture(pts, w / total)
