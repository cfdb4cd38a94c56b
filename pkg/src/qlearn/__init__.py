"""Desk-scale lab for quantum vs classical query complexity of learning."""

from .concepts import (Concept, ConceptClass, ConceptError, FlipMask, GammaReport, gamma_at,
                       gamma_hat, gamma_of_subset, build_semirich_set, vc_dimension)
from .zoo import ClassSpec, SpecError, delta_class, parity_class

__version__ = "0.1.0"

__all__ = ["Concept", "ConceptClass", "ConceptError", "FlipMask", "GammaReport", "gamma_at",
           "gamma_hat", "gamma_of_subset", "build_semirich_set", "vc_dimension", "ClassSpec",
           "SpecError", "delta_class", "parity_class"]
