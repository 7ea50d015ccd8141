"""Numerical laboratory for Ricci flow and volume entropy on homogeneous 3-manifolds."""

from .geometries import (GeometryModel, MetricState, CurvatureReport,
                         catalog_lookup, catalog_names, curvature, scale_metric)
from .flow import (FlowCaps, FlowTrajectory, SolitonSpec, closed_form_flow,
                   closed_form_trajectory, flow_rhs, integrate_flow,
                   measure_evolution_check)
from .balls import (JacobiRay, VolumeProfile, ball_volume_profile,
                    closed_form_profile, closed_form_volume, geodesic_jacobi_ray,
                    mean_curvature_integral, profile_for_state, volume_at)
from .entropy import (EntropyEstimate, EvolutionAudit, GrowthSample,
                      MonotonicityAudit, collapse_proxy, entropy_estimate,
                      evolution_audit, growth_function, hypothesis_sign,
                      monotonicity_audit, radial_identity_check, soliton_check,
                      supersolution_compare)
from .rescaling import (BlowupFit, GrowthShiftResult, RescalingTransform,
                        classify_blowup, growth_shift_identity,
                        limit_entropy_experiment, parabolic_rescale)
from .sphere_grids import get_quadrature, QUADRATURE_NAMES, DEFAULT_QUADRATURE

__version__ = "0.1.0"
