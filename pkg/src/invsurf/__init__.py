"""Surfaces from principal curvatures and principal geodesic curvatures.

Reconstruction of strongly regular surfaces from their invariants,
natural equations of Weingarten surfaces, geometric principal parameters,
class Gamma and canal surfaces, and closed-form fixtures.
"""
__version__ = "0.1.0"

from .errors import SurfaceError  # noqa: F401
from .grid import ParamGrid, ScalarField, VectorField3  # noqa: F401
from .invariants import (FundamentalForms, InvariantQuadruple,  # noqa: F401
                         bonnet_admissibility, forms_from_invariants)
from .frames import reconstruct, rigid_align  # noqa: F401
from .weingarten import WeingartenPair, cmc_pair, constant_curvature_pair  # noqa: F401
