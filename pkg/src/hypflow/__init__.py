"""Star-shaped radial graphs in hyperbolic space.

Curvature functionals, inverse mean curvature and Brendle flows, and the
mass / Penrose checks on Schwarzschild-type graphs.
"""

from .grid import DomainError, make_grid, quadrature, unit_sphere_area
from .geometry import RadialGraph, compute_fields
from .shapes import ShapeError, ShapeSpec, build
from .functionals import af_margin, bhw_margin, evaluate
from .flows import FlowError, FlowKind, FlowSpec, asymptotics_report, run
from .mass import AdSSModel, MassError, build_adss_profile, mass_formula, mass_functional, penrose_check

__version__ = "0.1.0"
