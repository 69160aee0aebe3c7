"""Modified Bessel functions of the first kind in log space, and the
Bessel-ratio helpers used by von Mises-Fisher densities.

All routines work on real, non-negative arguments. Orders are the ones that
appear for spheres S^{d-1}: ``d/2 - 1`` and ``d/2``.
"""

import math

import numpy as np
from scipy.special import gammaln, logsumexp

__all__ = [
    "log_bessel_i",
    "bessel_ratio",
    "bessel_ratio_deriv",
    "inv_bessel_ratio",
    "vmf_log_norm",
]

_SERIES_MAX_X = 20.0
_LOG_2PI = math.log(2.0 * math.pi)


def _is_half_integer(nu):
    return abs(nu - math.floor(nu) - 0.5) < 1e-12


def _check_order(nu):
    nu = float(nu)
    if not np.isfinite(nu) or nu < -0.5:
        raise ValueError(f"unsupported Bessel order nu={nu}")
    return nu


def _log_series(nu, x, n_terms=None):
    """ln I_nu(x) from the power series, summed in log space."""
    if x == 0.0:
        return 0.0 if nu == 0.0 else -np.inf
    if n_terms is None:
        n_terms = int(x + 10.0 * math.sqrt(x) + 60)
    k = np.arange(n_terms, dtype=float)
    logt = (2.0 * k + nu) * math.log(0.5 * x) - gammaln(k + 1.0) - gammaln(k + nu + 1.0)
    return float(logsumexp(logt))


def _hankel_sum(nu, x):
    """Sum of the large-argument expansion I_nu(x) ~ e^x/sqrt(2 pi x) * S.

    Returns ``(S, converged)``. The expansion terminates for half-integer
    orders, where it is exact up to the neglected e^{-x} branch.
    """
    mu = 4.0 * nu * nu
    total = 1.0
    term = 1.0
    prev = math.inf
    for k in range(1, 200):
        factor = mu - (2 * k - 1) ** 2
        if factor == 0.0:
            return total, True
        term *= -factor / (8.0 * k * x)
        if abs(term) > abs(prev):
            # asymptotic series started to diverge
            return total, abs(prev) <= 1e-16 * abs(total)
        total += term
        if abs(term) <= 1e-17 * abs(total):
            return total, True
        prev = term
    return total, False


def _log_half_integer(n, x):
    """Closed hyperbolic form of ln I_{n+1/2}(x), valid without cancellation for large x."""
    # I_{n+1/2}(x) = (2 pi x)^{-1/2} [e^x S(-) + (-1)^{n+1} e^{-x} S(+)]
    coef = [math.factorial(n + k) / (math.factorial(k) * math.factorial(n - k)) / (2.0 * x) ** k
            for k in range(n + 1)]
    s_minus = sum(c * (-1) ** k for k, c in enumerate(coef))
    s_plus = sum(coef)
    tail = (-1) ** (n + 1) * math.exp(-2.0 * x) * s_plus
    return x - 0.5 * (_LOG_2PI + math.log(x)) + math.log(s_minus + tail)


def _log_bessel_scalar(nu, x):
    if x < 0.0 or not np.isfinite(x):
        raise ValueError(f"log_bessel_i requires finite x >= 0, got {x}")
    if x <= _SERIES_MAX_X:
        return _log_series(nu, x, n_terms=90)
    if _is_half_integer(nu) and nu > 0:
        return _log_half_integer(int(round(nu - 0.5)), x)
    s, ok = _hankel_sum(nu, x)
    if ok and s > 0:
        return x - 0.5 * (_LOG_2PI + math.log(x)) + math.log(s)
    return _log_series(nu, x)


def log_bessel_i(nu, x):
    """Natural log of the modified Bessel function ``I_nu(x)``.

    ``x`` may be a scalar or an array; ``nu`` is a scalar order >= -1/2.
    Stays finite far beyond the range where ``I_nu`` overflows.
    """
    nu = _check_order(nu)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or not np.all(np.isfinite(xa)):
        raise ValueError("log_bessel_i requires finite x >= 0")
    if xa.ndim == 0:
        return _log_bessel_scalar(nu, float(xa))
    out = np.array([_log_bessel_scalar(nu, float(v)) for v in xa.ravel()])
    return out.reshape(xa.shape)


def _ratio_cf(nu, x, max_terms=100000):
    """I_nu(x) / I_{nu-1}(x) by the Gauss continued fraction (modified Lentz).

    The ratio is 1 / (b_0 + 1/(b_1 + 1/(b_2 + ...))) with b_k = 2 (nu + k) / x.
    """
    tiny = 1e-300
    f = 2.0 * nu / x
    c = f
    dd = 0.0
    for k in range(1, max_terms):
        b = 2.0 * (nu + k) / x
        dd = b + dd
        dd = tiny if dd == 0.0 else dd
        c = b + 1.0 / c
        c = tiny if c == 0.0 else c
        dd = 1.0 / dd
        delta = c * dd
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return 1.0 / f


def _ratio_scalar(d, lam):
    if lam < 0 or not np.isfinite(lam):
        raise ValueError(f"bessel_ratio requires finite lambda >= 0, got {lam}")
    if lam == 0.0:
        return 0.0
    nu = d / 2.0
    if lam <= _SERIES_MAX_X:
        return math.exp(_log_series(nu, lam, 90) - _log_series(nu - 1.0, lam, 90))
    num, ok_num = _hankel_sum(nu, lam)
    den, ok_den = _hankel_sum(nu - 1.0, lam)
    if ok_num and ok_den and den > 0:
        return num / den
    return _ratio_cf(nu, lam)


def bessel_ratio(d, lam):
    """Mean resultant length ``A_d(lam) = I_{d/2}(lam) / I_{d/2-1}(lam)`` of a vMF on S^{d-1}."""
    d = int(d)
    if d < 3:
        raise ValueError("bessel_ratio requires d >= 3")
    la = np.asarray(lam, dtype=float)
    if la.ndim == 0:
        return _ratio_scalar(d, float(la))
    return np.array([_ratio_scalar(d, float(v)) for v in la.ravel()]).reshape(la.shape)


def bessel_ratio_deriv(d, lam, limit_at_zero=False):
    """Derivative ``A_d'(lam) = 1 - A^2 - (d-1)/lam * A``.

    At ``lam == 0`` the expression is 0/0; pass ``limit_at_zero=True`` to get
    the limit ``1/d`` instead of an error.
    """
    lam = float(lam)
    if lam < 0:
        raise ValueError("bessel_ratio_deriv requires lambda > 0")
    if lam == 0.0:
        if limit_at_zero:
            return 1.0 / d
        raise ValueError("bessel_ratio_deriv is undefined at lambda = 0")
    if lam < 1e-4:
        # A_d(x) = x/d - x^3/(d^2 (d+2)) + O(x^5)
        return 1.0 / d - 3.0 * lam * lam / (d * d * (d + 2))
    a = bessel_ratio(d, lam)
    return 1.0 - a * a - (d - 1.0) / lam * a


def inv_bessel_ratio(d, r, tol=1e-10, max_newton=50):
    """Solve ``A_d(lam) = r`` for ``lam``.

    Starts from ``r (d - r^2) / (1 - r^2)`` and runs Newton steps; falls back
    to bisection if Newton leaves the bracket or stalls.
    """
    d = int(d)
    r = float(r)
    if not 0.0 <= r < 1.0:
        raise ValueError(f"inv_bessel_ratio requires 0 <= r < 1, got {r}")
    if r == 0.0:
        return 0.0
    lam0 = r * (d - r * r) / (1.0 - r * r)
    lo, hi = 0.0, 2.0 * lam0 + 10.0
    while bessel_ratio(d, hi) < r:
        lo, hi = hi, 2.0 * hi
    lam = min(max(lam0, lo), hi)
    for _ in range(max_newton):
        f = bessel_ratio(d, lam) - r
        if abs(f) <= tol:
            return lam
        if f > 0:
            hi = min(hi, lam)
        else:
            lo = max(lo, lam)
        step = f / bessel_ratio_deriv(d, lam) if lam > 0 else np.inf
        cand = lam - step
        lam = cand if lo < cand < hi else 0.5 * (lo + hi)
    # bisection fallback
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        f = bessel_ratio(d, mid) - r
        if abs(f) <= tol or hi - lo <= 1e-15 * hi:
            return mid
        if f > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def vmf_log_norm(d, lam):
    """Log of the vMF normalizer ``lam^{d/2-1} / ((2 pi)^{d/2} I_{d/2-1}(lam))``."""
    lam = float(lam)
    if lam <= 0:
        raise ValueError("vmf_log_norm requires lambda > 0")
    nu = d / 2.0 - 1.0
    return nu * math.log(lam) - 0.5 * d * _LOG_2PI - log_bessel_i(nu, lam)
