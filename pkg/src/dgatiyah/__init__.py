"""Exact computations with dg-manifolds: Atiyah cocycles, the PBW map,
transferred L-infinity[1] brackets, Todd classes and g[1] cohomology."""

from .algebra import GradedContext, ParseError, Polynomial, koszul, parse_poly
from .char_classes import (EndValuedForm, FormContext, as_end_valued_form, matrix_power,
                           scalar_atiyah, series_coefficients, supertrace, todd)
from .cohomology import (LieAlgebraData, assemble_slice, bracket_class_check, ce_manifold,
                         cohomology_dim, duflo_compare, is_exact)
from .connections import (Connection, DgVectorBundle, Tensor, atiyah_bundle, atiyah_tangent,
                          complex_differential, symmetrize, tangent_bundle, torsion,
                          velociraptor)
from .manifest import load
from .pbw import DiffOperator, PBW, SymTensor, TransferredBrackets, linfty_check, pbw, pbw_inverse
from .vector_fields import DgManifold, VectorField, bracket, validate_homological

__version__ = "0.1.0"
