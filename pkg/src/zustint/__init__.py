"""Hölder integration of ``f dg^1 ^ ... ^ dg^d`` on rectangles and fractal domains.

Rectangle integrals come from dyadic germ sums; integrals over general
domains pair the wavelet coefficients of the distribution ``f dg`` with
those of the domain's indicator.
"""

__version__ = "0.1.0"

from .distribution import DistributionRep, coeff_sweep, continuity_study, regularity_fit
from .dyadic import DyadicCube, Face, Rectangle, faces, subdivide
from .funcrep import FunctionRep, from_json, g_beta, make_f_gamma_delta, mollify
from .geometry import (BoxCounts, DomainSpec, GridDomain, besov_criterion, box_count,
                       box_dimension_estimate, build_grid, indicator_coeffs, lebesgue_boundary)
from .pairing import PairingResult, integrate_over_domain, pair
from .sewing import IntegralResult, SewingConfig, boundary_integral, zust_integral
from .wavelets import CoefficientField, WaveletBasis, build_basis

__all__ = [
    "BoxCounts", "CoefficientField", "DistributionRep", "DomainSpec", "DyadicCube", "Face",
    "FunctionRep", "GridDomain", "IntegralResult", "PairingResult", "Rectangle",
    "SewingConfig", "WaveletBasis", "besov_criterion", "boundary_integral", "box_count",
    "box_dimension_estimate", "build_basis", "build_grid", "coeff_sweep", "continuity_study",
    "faces", "from_json", "g_beta", "indicator_coeffs", "integrate_over_domain",
    "lebesgue_boundary", "make_f_gamma_delta", "mollify", "pair", "regularity_fit",
    "subdivide", "zust_integral",
]
