"""Weighted point sets on the unit hypersphere."""

from dataclasses import dataclass

import numpy as np

UNIT_TOL = 1e-12
WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class DiracMixture:
    """Dirac mixture on S^{d-1}.

    ``points`` is a ``(d, m)`` array whose columns are unit vectors and
    ``weights`` a length-``m`` probability vector.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        w = np.array(self.weights, dtype=float).ravel()
        if pts.ndim != 2:
            raise ValueError("points must be a (d, m) matrix")
        if pts.shape[1] != w.size:
            raise ValueError(f"{pts.shape[1]} points but {w.size} weights")
        if pts.shape[0] < 2 or w.size == 0:
            raise ValueError("empty or one-dimensional mixture")
        norms = np.linalg.norm(pts, axis=0)
        if np.any(np.abs(norms - 1.0) > UNIT_TOL):
            raise ValueError(f"points must be unit vectors (max norm error {np.max(np.abs(norms - 1)):.2e})")
        if np.any(w < 0) or abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError("weights must be nonnegative and sum to 1")
        pts.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def d(self):
        return self.points.shape[0]

    @property
    def m(self):
        return self.points.shape[1]

    @classmethod
    def uniform(cls, points):
        points = np.asarray(points, dtype=float)
        m = points.shape[1]
        return cls(points, np.full(m, 1.0 / m))

    @classmethod
    def from_unnormalized(cls, points, weights):
        """Build from raw points and weights, normalizing both."""
        points = np.asarray(points, dtype=float)
        points = points / np.linalg.norm(points, axis=0, keepdims=True)
        w = np.asarray(weights, dtype=float)
        return cls(points, w / w.sum())

    def resultant(self):
        """Weighted vector sum of the points."""
        return self.points @ self.weights

    def scatter(self):
        """Weighted second-moment matrix ``sum_i w_i x_i x_i^T``."""
        return (self.points * self.weights) @ self.points.T
