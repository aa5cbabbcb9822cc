"""Collective decay rates and shifts of emitter lattices with power-law couplings."""

__version__ = "0.1.0"

from .core import (
    DimensionConstants,
    InfeasibleError,
    Lattice,
    LatticePosition,
    LatticeSpec,
    NumericalError,
    ValidationError,
    Wavevector,
    build_lattice,
    dimension_constants,
)
from .coupling import CouplingModel, SingleAtomTerm, coupling_matrix, dicke_matrix, preset
from .spectrum import SpectrumResult, dispersion_scan, lattice_sum, solve_modes
from .specfun import bessel_j0, integrate_oscillatory, sinc, upper_incomplete_gamma
from .analytics import (
    AnalyticContext,
    ContinuumWarning,
    chi_max,
    chi_of_xi,
    closed_form_J,
    continuum_I,
    find_offset_h,
    shift_of_xi,
)
from .design import DesignTarget, dicke_compatible, similar_alpha, solve_design, transform_chi
