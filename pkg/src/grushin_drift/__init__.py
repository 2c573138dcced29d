"""Numerics for Grushin operators with drift.

Heat kernels, Riesz-transform kernels, the Grushin quasi-metric, exponential
measure ball volumes, transference on the Heisenberg-Reiter group and the
scaled-drift Euclidean limit.
"""
__version__ = "0.1.0"

from .core import (Dimensions, Drift, GrushinMultiIndex, GrushinPoint, check_orthogonal, dilate,
                   rotate, rotate_drift)
from .errors import (AccuracyNotMet, DegenerateEstimate, DiagonalSingularity, DivergentIntegral,
                     GrushinError, InvalidArgument)
from .euclid import (DriftLimitConfig, bump, euclid_drift_riesz, euclid_multiplier,
                     scaled_conjugated_riesz, scaled_conjugated_riesz_grid)
from .geometry import (BallSpec, VolumeEstimate, ball_volume_lebesgue_ref, ball_volume_mu_asymptotic,
                       ball_volume_mu_mc, grushin_distance)
from .grids import Grid, SampledFunction
from .group import (GroupElement, GroupKernel, group_inv, group_mul, sigma_apply,
                    transference_apply, transference_check)
from .heat import (HeatKernelValue, apply_heat_semigroup, fit_gaussian_bound, grushin_apply,
                   heat_kernel, heat_kernel_derivative, heat_kernel_drift)
from .lab import (BlowupReport, NormReport, TestFamily, lp_norm, norm_sweep, weak11_blowup_experiment,
                  weak_quasinorm)
from .mehler import DerivativePrefactor, mehler_derivative_prefactor, mehler_kernel
from .quadrature import DEFAULT_SPEC, QuadratureSpec
from .riesz import (RegularizationParams, RieszKernelRequest, apply_riesz, b_eps_delta,
                    regularized_riesz_kernel, riesz_kernel, riesz_kernel_fast, scalar_multiplier_gap)
