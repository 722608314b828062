"""Conjugate instants, Morse indices and bifurcation on shrinking domains.

Linear Dirichlet problems ``-div(a grad u) + f u = 0`` on the rescaled
domains ``r * Omega`` (an interval or the unit ball, separated into angular
modes) are discretized by P1 finite elements. Inertia counts of the
resulting tridiagonal pencils locate the radii where the problem has a
nontrivial kernel, crossing forms certify those radii, and a shooting solver
checks that nonlinear branches bifurcate exactly there.
"""

from .assembly import Grid, OperatorPencil, assemble_operator, assemble_parameter_derivative, mass_matrix
from .crossing import (CrossingReport, certify_conjugate_instant, crossing_form_boundary,
                       crossing_form_derivative, crossing_signature)
from .errors import IDENTITY_CODES, ConjscanError
from .fields import CoefficientField, Nonlinearity
from .inertia import (Inertia, kernel_basis, kernel_dimension, morse_index, pencil_inertia,
                      smallest_eigenpairs, smallest_eigenvalues, tridiagonal_inertia)
from .matrix_lab import (MatrixPath, diagonal_path, find_crossings, galerkin_path, random_path,
                         verify_isolation_bound, verify_morse_jump)
from .nonlinear import ShootingState, branch_radii, branch_radius, shoot, verify_bifurcation_theorem
from .problem import (AngularMode, Interval1DProblem, RadialProblem, interval_problem, radial_problem,
                      validate)
from .scan import (Crossing, ScanReport, bifurcation_lower_bound, scan_conjugate_instants,
                   verify_smale_identity)

__version__ = "0.1.0"
