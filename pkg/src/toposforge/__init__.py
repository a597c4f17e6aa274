"""Desk-scale workbench for finite sites, their sheaves, and the geometric
structures (atlases, holonomy, developing data, deformations) carried by
them."""

__version__ = "0.1.0"

from ._kernels import backend as kernel_backend
from .errors import ToposforgeError, ValidationFailure, Verdict
from .fincat import (
    FiniteCategory,
    FunctorData,
    full_subcategory,
    functor_compose,
    functor_equal,
    functor_identity,
    functor_invert,
    functor_is_invertible,
    slice_category,
    slice_object_underlying,
    validate_category,
    validate_functor,
)
from .site import (
    CoveringFamily,
    GrothendieckTopology,
    Sieve,
    Site,
    family_sieve,
    generate_sieve,
    is_connected_family,
    is_connected_object,
    is_covering_family,
    minimal_topology,
    pullback_sieve,
    validate_topology,
)
from .sheaf import (
    SheafObject,
    SheafOfSets,
    components,
    global_sections,
    is_constant,
    is_constant_on_slice,
    is_sheaf,
    is_subcanonical,
    matching_families,
    product,
    representable,
    representable_presheaf,
    sections_over,
    terminal_object,
    trivializing_family,
    validate_presheaf,
)
from .nerve import (
    NerveGraph,
    PathClass,
    compose_paths,
    invert_path,
    nerve_graph,
    reduce_walk,
    spanning_tree,
)
from .holonomy import (
    CayleyTable,
    PermutationGroup,
    ProGroupPresentation,
    TransitionSystem,
    compare_holonomy,
    enumerate_homomorphisms,
    exhaustive_holonomy_group,
    find_isomorphism,
    gauge_conjugate,
    holonomy_group,
    holonomy_of_walk,
    is_simply_connected_bounded,
    pro_pi1_presentation,
    refinement_invariance_check,
    transition_isos,
)
from .geostruct import (
    Atlas,
    AutomorphismGroup,
    Chart,
    DeformationSet,
    FlatBundle,
    GermSpace,
    Section,
    StructuralBundle,
    change_model,
    check_cg_morphism,
    check_ppa,
    deformation_rigidity,
    developing,
    enumerate_representations,
    flat_bundle,
    structural_bundle,
    structure_from_section,
    structure_holonomy,
    structure_sheaf,
    tautological_section,
    validate_atlas,
    validate_local_iso,
    validate_section,
)
