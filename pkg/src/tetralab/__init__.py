"""Numerical laboratory for Toeplitz operators on the Hardy space of the tetrablock."""

from .hardy import (
    GradedBasis,
    build_ladder_basis,
    dim_hom_minus,
    enumerate_hom_minus,
    gram_matrix,
    parity_check,
    psi_forward,
    psi_inverse,
)
from .measure import (
    BoundaryPointR,
    MeasureContext,
    MultiIndex,
    QuadratureSpec,
    haar_unitary_sample,
    involution_sigma,
    jacobian_phi,
    map_phi,
    moment,
    moment_E,
    normalization_C,
    sample_boundary_R,
    shilov_E_membership,
)
from .poly import Poly
from .symbols import SymbolExpr, parse_symbol, symbol_pullback
from .toeplitz import (
    OperatorWindow,
    brown_halmos_residual,
    check_tuple_relations,
    compactness_probe,
    coordinate_windows,
    ladder_shift_check,
    symbol_recovery,
    toeplitz_window,
)

__version__ = "0.1.0"
