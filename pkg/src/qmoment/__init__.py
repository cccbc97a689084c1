"""Quantum (Helstrom) bounds and SPADE errors for moment estimation of
subdiffraction incoherent objects."""

from .errors import QMomentError
from .helstrom import (BoundResult, bound_from_pad, helstrom_bound, helstrom_matrix,
                       information_matrix, rayleigh_quotient, solve_score, solve_scores)
from .operators import (MomentSpec, ObjectModel, PadMatrices, assemble, dgamma_matrices,
                        gamma0_matrix, u_vector)
from .orthopoly import OrthoPolySet, build_orthonormal, orthonormal_for_weight, weight_moments
from .psf import TransferModel, overlap_C, overlap_C_numeric, overlap_norm_D, spherical_bessel
from .quadrature import QuadratureRule, build_rule, integrate
from .spade import (McReport, SpadeResult, mc_simulate, spade_error, spade_error_even,
                    spade_error_normalized, spade_error_odd)
from .sweep import (CoefficientRow, FitResult, SweepConfig, SweepRow, format_table, loglog_fit,
                    make_report, run_sweep, stability_check)

__version__ = "0.1.0"
