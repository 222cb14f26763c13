"""Hecke module of Hermitian forms over F_{q^2}((t)): exact counts and freeness certificates."""

from .field import FieldConfig, LocalField, LocalScalar, ResidueField, local_field
from .lattice import MatrixE, cartan_coordinate, min_minor_valuation, smith_form, smith_invariants
from .hermitian import HermitianForm, congruence_diagonalize, gram_valuation, group_action, min_subspace_valuation, orbit_invariant
from .weights import chamber_coords, dominance_leq, dominant_box, from_chamber, residue_classes
from .hecke import HeckeContext, HeckeElement, ModuleElement, act, convolve, coset_reps, leading_decomposition
from .filtered import (
    FreenessCertificate,
    TruncatedModuleModel,
    build_model,
    certify_graded_freeness,
    check_filtration_compatibility,
    graded_leading_model,
    lift_freeness,
    verify_certificate,
)

__version__ = "0.1.0"
