"""Constant mean curvature surfaces and stability in the model spaces M(kappa)."""
from .errors import (CCFormsError, ConfigError, DomainError, InputError, IntegrationError,
                     QuadratureError, SingularityError, UnsupportedError)
from .model_space import FrameVector, SpaceForm, frame_at, inner, pushforward, structure_constants
from .geodesics import (GeodesicSpec, GeodesicState, closed_form_geodesic, curvature_estimate,
                        geodesic_flow, integrate_geodesic)
from .jacobi import JacobiField, VerticalComponent, jacobi_vector, numeric_jacobi, solve_vertical
from .surfaces import (AngleFunction, Helicoid, PolePlane, Sphere, Strip, build_helicoid,
                       build_pole_surface, build_sphere, build_strip, eval_surface,
                       immersion_status, locate_singular_vertical)
from .geometry import (derivative_identities, l_nh_closed_form, mean_curvature, shape_entries,
                       surface_frame, unit_normal)
from .stability import (INCONCLUSIVE, STRICT, STRONG, UNSTABLE, StabilityReport, TestFunction, Window,
                        classify, index_form, index_form_sorpasso, jacobi_operator, plane_identity_suite,
                        q_value)

__version__ = "0.1.0"
