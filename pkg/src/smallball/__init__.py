"""Explicit small-ball probability bounds with numerical oracles."""
from .bounds import (BRANCHES, BoundReport, SobolevParams, fourier_l1_bound, gamma_tail_bound,
                     high_smoothness_bound, lo_bound, lo_bound_lp_corollary, lp_corollary_constant,
                     smoothed_bound, sobolev_M, sobolev_small_ball_bound, sup_density_bound,
                     weight_lp_norm_bound)
from .errors import (CapabilityError, ConvergenceError, DimensionError, DomainError, NoValidSpreadError,
                     NotApplicableError, ParameterError, RangeError, SmallBallError)
from .geometry import (GaussianMeasureEstimate, QuasiNormSpec, gaussian_measure, lp_ball_volume,
                       lp_quasinorm, quasinorm_constant, sphere_area)
from .lcd import (LcdParams, LcdResult, dist_to_lattice, f_theta, gamma_Ts_estimate, integer_structure_bound,
                  lcd_search, lo_rhs_integral)
from .models import (AtomLaw, VectorModel, charfun, point_mass, sample, smoothed, spread_parameter,
                     standard_gaussian, sup_density, two_point, uniform_interval, weighted_sum)
from .quadrature import (McEstimate, QuadResult, binomial_ci, charfun_l1_norm, estimate_small_ball,
                         estimate_small_ball_grid, radial_integral, sobolev_norm_numeric,
                         weighted_charfun_integral)

__version__ = "0.1.0"

__all__ = [
    "AtomLaw",
    "BRANCHES",
    "BoundReport",
    "CapabilityError",
    "ConvergenceError",
    "DimensionError",
    "DomainError",
    "GaussianMeasureEstimate",
    "LcdParams",
    "LcdResult",
    "McEstimate",
    "NoValidSpreadError",
    "NotApplicableError",
    "ParameterError",
    "QuadResult",
    "QuasiNormSpec",
    "RangeError",
    "SmallBallError",
    "SobolevParams",
    "VectorModel",
    "binomial_ci",
    "charfun",
    "charfun_l1_norm",
    "dist_to_lattice",
    "estimate_small_ball",
    "estimate_small_ball_grid",
    "f_theta",
    "fourier_l1_bound",
    "gamma_Ts_estimate",
    "gamma_tail_bound",
    "gaussian_measure",
    "high_smoothness_bound",
    "integer_structure_bound",
    "lcd_search",
    "lo_bound",
    "lo_bound_lp_corollary",
    "lo_rhs_integral",
    "lp_ball_volume",
    "lp_corollary_constant",
    "lp_quasinorm",
    "point_mass",
    "quasinorm_constant",
    "radial_integral",
    "sample",
    "smoothed",
    "smoothed_bound",
    "sobolev_M",
    "sobolev_norm_numeric",
    "sobolev_small_ball_bound",
    "sphere_area",
    "spread_parameter",
    "standard_gaussian",
    "sup_density",
    "sup_density_bound",
    "two_point",
    "uniform_interval",
    "weight_lp_norm_bound",
    "weighted_charfun_integral",
    "weighted_sum",
]
