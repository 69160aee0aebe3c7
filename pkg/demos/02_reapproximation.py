"""Compress thousands of samples into a few equally weighted points.

A unimodal vMF sample set and an antipodally symmetric Bingham sample set
are each reduced with the trust-region solver on the oblique manifold.
Summary statistics of the source should survive the compression.
"""

import numpy as np

from hdmr.manifold import sample_bingham, sample_vmf
from hdmr.reapprox import ReapproxConfig, hdmr

mu = np.array([0.0, 0.0, 1.0])
src = sample_vmf(3, mu, 10.0, 2000, seed=1)
tgt, rep = hdmr(src, ReapproxConfig(20, seed=1))
print(f"vMF(lambda=10): 2000 -> 20 points, {rep.iterations} iterations ({rep.termination})")
print(f"  distance {rep.info['D_init']:.3e} -> {rep.info['D_final']:.3e}")
rs, rt = src.resultant(), tgt.resultant()
cos = rt @ rs / np.linalg.norm(rt) / np.linalg.norm(rs)
print(f"  mean direction differs by {np.degrees(np.arccos(min(cos, 1.0))):.3f} deg")
print(f"  resultant length source {np.linalg.norm(rs):.4f}, target {np.linalg.norm(rt):.4f}")

src = sample_bingham(3, -np.diag([10.0, 10.0, 0.0]), 2000, seed=2)
tgt, rep = hdmr(src, ReapproxConfig(40, seed=2))
print(f"\nBingham(-diag(10,10,0)): 2000 -> 40 points, {rep.iterations} iterations")
axis_s = np.linalg.eigh(src.scatter())[1][:, -1]
axis_t = np.linalg.eigh(tgt.scatter())[1][:, -1]
print(f"  principal axes |dot| = {abs(axis_s @ axis_t):.4f}")
print(f"  norm of target mean = {np.linalg.norm(tgt.points.mean(axis=1)):.4f} (antipodal balance)")
print(f"  points in upper / lower hemisphere: {(tgt.points[2] > 0).sum()} / {(tgt.points[2] < 0).sum()}")
