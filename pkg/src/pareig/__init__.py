"""Growth-rate eigenvalues of 1-D time-dependent parabolic Dirichlet problems."""

__version__ = "0.1.0"

from .coeffield import CoefficientField, Domain1D, FieldError, make_field, make_sigma  # noqa: E402
from .discretize import Mesh, build_mesh  # noqa: E402
from .stepper import StepScheme  # noqa: E402

__all__ = ["CoefficientField", "Domain1D", "FieldError", "Mesh", "StepScheme", "build_mesh",
           "make_field", "make_sigma", "__version__"]
