"""Rigid deflection identification from displacement fields and 6x6 compliance assembly."""
from .beam import BeamSpec, beam_benchmark, beam_compliance_analytic, beam_compliance_discretized
from .compliance import (ComplianceMatrix, Experiment, LoadCase, identify, prune, recommend_loads, scale_ci,
                         symmetrize, to_stiffness)
from .errors import (DegenerateFieldError, FieldFileError, InsufficientDataError, NonPhysicalMatrixError,
                     NumericalError, RecommendationError, StiffidError, UnidentifiableError, ValidationError)
from .estimators import (EstimatorOutput, SvdVariant, d_cubic_closed_form, d_matrix, d_planar_closed_form,
                         estimate_lin, estimate_lin_full, estimate_svd)
from .fieldgen import (NOISE_PRESETS, GridSpec, NoiseSpec, add_noise, apply_rigid, inject_outliers, make_grid,
                       simulate_experiment)
from .geometry import (DisplacementField, RigidDeflection, elementary_rotation, exact_rotation, skew_neg,
                       small_rotation)
from .stats import (DeflectionCovariance, SignificanceConfig, deflection_covariance, estimate_sigma,
                    filter_outliers, significance_test)

__version__ = "0.1.0"
