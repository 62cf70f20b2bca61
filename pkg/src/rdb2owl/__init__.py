"""Direct mapping of relational databases to RDF/OWL, with a relational
algebra to SPARQL compiler, an inverse mapping and property checks."""
from __future__ import annotations

from .directmap import MappingConfig, Variant, direct_map, extract_ontology
from .inverse import recover_database
from .ra2sparql import translate
from .rdfgraph import RdfGraph, is_consistent, parse_ntriples, serialize_ntriples
from .relalg import evaluate, parse_ra
from .relmodel import Database, load_database, satisfies
from .sparql import eval_pattern, serialize_sparql

__version__ = "0.1.0"

__all__ = [
    "Database", "MappingConfig", "RdfGraph", "Variant", "direct_map", "eval_pattern",
    "evaluate", "extract_ontology", "is_consistent", "load_database", "parse_ntriples",
    "parse_ra", "recover_database", "satisfies", "serialize_ntriples", "serialize_sparql",
    "translate",
]
