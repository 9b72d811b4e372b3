"""Classify Killing tensors of flat 3-space by the orthogonal web they define,
and find the webs in which a natural Hamiltonian separates."""

from .canonical import (SeparableChart, canonical_web_tensor, chart_map, chart_pushforward_check,
                        symmetric_eig3, to_canonical)
from .classify import (ClassificationReport, ConsistencyError, DomainError, KvClass, KvKind,
                       NotCKTError, WebClass, canonicalize_kv, classify_kv, classify_web,
                       symmetry_basis)
from .exactmath import Poly, RatFun, RatMatrix, UsageError, nullspace, rref
from .invariants import (InvariantVector, full_invariants, kv_invariants, rotational_invariants,
                         translational_invariants, xi_invariants)
from .killing import (Isometry, KTParams, KVParams, apply_isometry, apply_isometry_kv,
                      char_discriminant, dtt_dimension, generator_matrix, has_distinct_eigenvalues,
                      has_normal_eigenvectors, lie_derivative, tsn_conditions)
from .pipeline import (CombinationPolicy, CompatibleSpace, SeparabilityReport, combination_search,
                       compatibility_space, extract_ckts, find_separable_webs)
from .potential import ParseError, parse_potential

__version__ = "0.1.0"
