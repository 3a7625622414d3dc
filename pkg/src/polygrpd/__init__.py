"""Exact finite groupoids, polynomial functors, species and trees."""

from .config import Caps, ParseError, SizeCapExceeded, get_caps, size_caps
from .groupoid import (FinGroupoid, GroupoidMap, TwoCell, ValidationReport, action_groupoid,
                       coproduct, cyclic, discrete, identity_map, name_object, point, product,
                       symmetric, terminal_map, validate_groupoid)
from .invariants import (compare, components, equivalent, homotopy_cardinality, pi0, skeleton)
from .functors import all_functors, mapping_groupoid
from .homotopy import (FamilyOver, base_change, dep_prod, dep_sum, fibre_decomposition,
                       fubini_check, groupoid_quotient, homotopy_fibre, homotopy_pullback,
                       homotopy_quotient, is_isofibration, strict_pullback)
from .polynomial import (PolyDiagram, PolySquare, apply_poly_morphism, beck_chevalley_check,
                         compose1, extend, extend_groupoid, identity_polynomial, is_combinatorial,
                         is_homotopy_cartesian, strict_square, validate_polynomial)
from .species import (Species, b_omega, c_omega, classical_extension, cyclic_polynomial,
                      cyclic_species, egf, linear_species, list_polynomial, multiset_polynomial,
                      multiset_species, polynomial_to_species, species_extension,
                      species_to_polynomial)
from .trees import (Node, PTree, TreeDiagram, build_ptree, enumerate_ptrees, ptree_aut_order, ptree_iso,
                    tree_stats, validate_ptree, validate_tree)

__version__ = "0.1.0"
