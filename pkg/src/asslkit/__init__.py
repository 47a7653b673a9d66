"""Toolchain for multi-tier autonomic-system specifications.

Parse specifications into immutable trees, check their consistency, execute
self-managing policies in a deterministic simulated runtime, verify temporal
properties over a bounded labeled transition system, and generate
path-coverage test suites for policies.
"""

from .checker import CheckedSpec, Diagnostic, check_all
from .lexer import tokenize
from .nodes import SpecificationTree
from .parser import ParseError, parse, parse_text
from .printer import pretty_print
from .tokens import LexError, SourceSpan

__version__ = "0.1.0"

__all__ = [
    "CheckedSpec",
    "Diagnostic",
    "LexError",
    "ParseError",
    "SourceSpan",
    "SpecificationTree",
    "check_all",
    "parse",
    "parse_text",
    "pretty_print",
    "tokenize",
    "__version__",
]
