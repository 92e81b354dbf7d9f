"""Numerical laboratory for twistor spaces of orthogonal complex structures."""

from . import algebroid, bundles, distributions, errors, leaves, linalg, pairs, sections, twistor
from .algebroid import (
    AnchorKind,
    DeltaMinus,
    DeltaPlus,
    PsiQS,
    Sigma,
    anchor,
    bracket,
    order_check,
    verify_axioms,
)
from .bundles import ConstraintClass, sandwich_check, twist_class
from .distributions import (
    DistributionSpec,
    complex_closure_check,
    distribution_basis,
    image_equivalence_check,
    involutivity_residual,
    refinement_check,
)
from .errors import TwistorError
from .leaves import (
    LeafClass,
    classify_orbit,
    leaf_report,
    membership,
    orbit_equivalent,
    repro_dim12,
    repro_s2,
    splice,
)
from .linalg import DEFAULT_TOL, MetricSpace, Subspace, Tolerances
from .pairs import decompose_pair, same_orientation, schubert_signature, synthesize_partner
from .sections import PHI, QPolynomial, ScalarFn, exact_derivative, symmetric_functions
from .twistor import random_point, standard_structure, tangent_basis

__version__ = "0.1.0"
