"""Forward simulation and boundary-data reconstruction for the 1-D Dirac
system on finite metric tree graphs."""

from .graph import (
    Edge,
    EdgePotential,
    MetricTree,
    TreeValidationError,
    validate_tree,
    walk_spectrum,
)
from .signals import (
    GridMismatchError,
    Signal,
    add_scale,
    convolve,
    extract_atoms,
    first_atom,
    shift,
    solve_volterra_second_kind,
)

__version__ = "0.1.0"
