"""Isoperimetric problems for closed curves in R^n.

Three notions of enclosed volume for a closed curve (projected multi-volume,
Omega-volume for a constant 2-form, and a bracket on the least spanning
area), length minimization under the first two, second-variation spectra,
and sampled calibration certificates.
"""

from .calibration import Certificate, PolynomialOneForm, Region, exterior_derivative, verify_certificate
from .curves import (
    DiscreteCurve,
    FourierCurve,
    FourierTerm,
    analytic_curvature,
    analytic_tangent,
    circle,
    double_curve,
    edge_tangents,
    resample_arclength,
    sample_fourier,
    star_curve,
)
from .errors import (
    DegeneracyError,
    InputError,
    IsoperiError,
    NumericalError,
    PreconditionError,
    ProjectionError,
    ResolutionError,
)
from .forms import AxisPlane, ConstantTwoForm, axis_planes, comass, interior_product
from .functionals import (
    MultiVolume,
    VolumeBracket,
    h_zero,
    length,
    length_gradient,
    multi_volume,
    multi_volume_jacobian,
    omega_volume,
    spanning_volume_bracket,
    stationarity_fit,
)
from .optimizer import ConstraintSet, OptimizationReport, OptimizerConfig, minimize_length, project_to_constraints
from .stability import SpectrumReport, constrained_hessian_spectrum, directional_second_variation, loop_transfer_field

__version__ = "0.1.0"
