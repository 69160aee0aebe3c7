"""Dirac mixture reapproximation on hyperspheres.

Compress large weighted point sets on S^{d-1} into a few equally weighted
points by minimizing a hyperspherical Cramér-von Mises distance, rebuild
continuous densities from them, and run a recursive filter that keeps its
posterior in that compressed form.
"""

from .hcvmd import HcvmdParams, epsilon_for, hcvmd_distance, hcvmd_egrad, hcvmd_ehess_action, hcvmd_unit
from .mixture import DiracMixture
from .reapprox import ReapproxConfig, hdmr
from .reconstruct import VmfMixture, fit_lambda, reconstruct
from .rtr import SolveReport, TrustRegionConfig

__all__ = [
    "DiracMixture",
    "HcvmdParams",
    "epsilon_for",
    "hcvmd_unit",
    "hcvmd_distance",
    "hcvmd_egrad",
    "hcvmd_ehess_action",
    "TrustRegionConfig",
    "SolveReport",
    "ReapproxConfig",
    "hdmr",
    "VmfMixture",
    "fit_lambda",
    "reconstruct",
]
