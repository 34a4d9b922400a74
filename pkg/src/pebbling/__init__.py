"""Pebble games, the pebbling comonad on bounded plays, and width invariants
for finite relational structures."""

from .errors import LawViolation, PebblingError, SignatureMismatch, SizeCapExceeded, StructureError
from .structures import (
    Signature,
    Structure,
    core,
    expand_identity,
    find_homomorphism,
    gaifman,
    induced_substructure,
    is_homomorphism,
    is_isomorphic,
    validate,
)
from .games import (
    Configuration,
    PositionalStrategy,
    Transducer,
    arrow_k,
    back_and_forth_equiv,
    bijection_game_equiv,
    consistency_number,
    determinize,
    existential_strategy,
    is_winning,
    realize,
    update,
)
from .comonad import (
    Coalgebra,
    KTraversal,
    check_comonad_laws,
    coalgebra_of_traversal,
    coextend,
    comult,
    counit,
    include,
    lift,
    position_of,
    tk_bounded,
    traversal_of_coalgebra,
    tree_decomposition_tk,
)
from .width import WidthReport, coalgebra_number, find_k_traversal, pebble_number, treewidth_oracle
from .logic import canonical_query, eval_box, evaluate, parse, quantifier_depth

__version__ = "0.1.0"
