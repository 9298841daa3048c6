"""Numerical toolkit for blow-up of the L2-critical 2D Zakharov-Kuznetsov equation.

Ground state, linearized and virial operators, their low spectra, the
blow-up constant c, the correction profile P, the coercivity certificate and
the reduced modulation ODE.
"""

__version__ = "0.1.0"

from .grid import (Field2D, Grid2D, Profile1D, differentiate, inner_product,  # noqa: E402
                   integrate_x, laplacian, make_grid, norm, scaling_lambda,
                   weight_phi, weight_phi_x, weight_phitilde)
from .ground_state import (ConvergenceError, GroundState, energy,  # noqa: E402
                           petviashvili, petviashvili_1d, residual_elliptic)
from .io import FieldFormatError, read_field, write_field  # noqa: E402
from .linops import (OperatorSpec, SparseOperator, apply_helmholtz, apply_L,  # noqa: E402
                     apply_virial, assemble_sparse)
from .elliptic import ProfileP, SolveResult, pcg_apply_inverse, solve_profile_P  # noqa: E402
from .spectra import EigPair, count_negative, eigs_smallest, parity_classify  # noqa: E402
from .constant_c import (ConstantCResult, compute_constant_c, constant_c_bvp,  # noqa: E402
                         constant_c_fourier, g_profile)
from .coercivity import (BasisSet, CoercivityCertificate, basis_functions,  # noqa: E402
                         certify_coercivity, gram_matrix, mstar_matrix,
                         sylvester_matrix, weinstein_matrix)
from .dynamics import (Trajectory, TrajectoryPoint, closed_form_lambda,  # noqa: E402
                       fit_blowup_exponent, integrate_ode, x1_law)
