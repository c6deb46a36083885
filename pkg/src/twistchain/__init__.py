"""Exact chain-level computations for twisted groupoid algebras.

The package instantiates, at desk scale and in exact arithmetic, the chain
constructions tying a twisted convolution algebra of a finite groupoid to
flat line-bundle data on fixed-point sets: transgression of a 2-cocycle to
sector characters, localized equivariant Cartan complexes, equivariant
(b, B)-chains with their periodic homology, and curved trace chain maps
verified against independently computed differentials.

All scalars live in cyclotomic-rational fields Q(zeta_n); every reported
dimension is the result of exact sparse elimination (compiled kernel with a
pure-Python fallback, selected at import).

Module map: scalars/linalg (arithmetic and elimination), groupoids
(finite groupoids, actions, cocycle plumbing), extensions (twisted
convolution algebras), transgression (sector line families), cartan
(graded-commutative models and equivariant complexes), cyclic
(equivariant (b, B)-complexes and periodic dimensions), hkr (curved
algebras, traces, and the localized chain map), fixtures (shared
desk-scale instances), cli (the command line).

cartan.verify_chain_map and hkr.verify_chain_map check different maps
(induced model maps vs the trace chain map); import them from their
modules rather than from here.
"""

from .scalars import CyclotomicField, Scalar, get_field, rational, root_of_unity
from .linalg import BACKEND, SparseMatrix, homology_dimension
from .groupoids import (
    FiniteGroupoid,
    GroupAction,
    action_groupoid,
    conjugacy_classes,
    cyclic_group,
    klein_four,
    pair_groupoid,
    symmetric_3,
    trivial_action,
)
from .extensions import (
    ExtensionCocycle,
    HaarWeights,
    TwistedConvolutionAlgebra,
    group_algebra,
    klein_bicharacter_cocycle,
    trivial_cocycle,
    twisted_algebra,
)
from .transgression import FlatLineFamily, delocalized_dimensions, transgress
from .cartan import CDGAModel, TwistData, cartan_complex, cohomology_dims
from .cyclic import (
    UNIT,
    CyclicChain,
    EquivariantCyclicComplex,
    crossed_product,
    operator_B,
    operator_b,
    periodic_dims,
)
from .hkr import CurvedDGA, GroupoidCurvedOmega, HKRFixture, TraceData, tau

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CDGAModel",
    "CurvedDGA",
    "CyclicChain",
    "CyclotomicField",
    "EquivariantCyclicComplex",
    "ExtensionCocycle",
    "FiniteGroupoid",
    "FlatLineFamily",
    "GroupAction",
    "GroupoidCurvedOmega",
    "HKRFixture",
    "HaarWeights",
    "Scalar",
    "SparseMatrix",
    "TraceData",
    "TwistData",
    "TwistedConvolutionAlgebra",
    "UNIT",
    "action_groupoid",
    "cartan_complex",
    "cohomology_dims",
    "conjugacy_classes",
    "crossed_product",
    "cyclic_group",
    "delocalized_dimensions",
    "get_field",
    "group_algebra",
    "homology_dimension",
    "klein_bicharacter_cocycle",
    "klein_four",
    "operator_B",
    "operator_b",
    "pair_groupoid",
    "periodic_dims",
    "rational",
    "root_of_unity",
    "symmetric_3",
    "tau",
    "transgress",
    "trivial_action",
    "trivial_cocycle",
    "twisted_algebra",
    "__version__",
]
