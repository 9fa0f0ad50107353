"""Quantitative torus-destruction toolkit.

Construction of explicit trigonometric-polynomial perturbations of the
integrable Hamiltonian ||y||^2/2 and finite-scale certification of the
variational destruction criterion: resonance arithmetic, integer
symplectic frames, Jackson-type approximation with certified rates, and
action-minimizing dynamics.
"""

__version__ = "0.1.0"

from .errors import (TorusbreakError, DomainError, PartnerQualityError,
                     ApproximationQualityError, BvpError,
                     MinimizationError, IntegrationError)
from .diophantine import (FrequencyVector, ResonanceHit, DiophantineProfile,
                          cf_expand, small_denominator, find_resonances,
                          classify, preset)
from .frames import (ResonanceFrame, SymplecticLift, PushforwardReport,
                     orthogonal_partner, complete_frame, symplectic_lift,
                     pushforward)
from .trigpoly import (PeriodicFn, TrigPoly, NormReport, bump, cosine,
                       constant, jackson, holder_norm, bernstein_verify,
                       mul_1d)
from .perturbation import (PerturbationParams, PerturbationSpec, VnFactors,
                           plan_parameters, build_v, build_v_factors,
                           assemble_P, build_with_escalation,
                           norm_scaling_report)
from .pendulum import PendulumPath, pendulum_bvp, action_profile
from .dynamics import (Trajectory, MechanicalSystem, HamiltonianSystem,
                       free_system, pendulum_system, drift_field_system,
                       shear_channel_system, rotation_vector,
                       pendulum_rotation_period)
from .minimize import (LagrangianModel, DiscretePath, minimize_path,
                       discrete_action, discrete_gradient, lagrangian_from,
                       pure_pendulum_model, integrable_model)
from .destruction import (DestructionReport, TrialResult, destruction_test,
                          integrable_twin, s0_box, path_box_analysis)
