from .ast import (
    Aggregate,
    AttrRef,
    Condition,
    Duration,
    EventTerm,
    Expr,
    FromClause,
    Join,
    Number,
    PatternAst,
    Seq,
    TriplePatternAst,
    Window,
)
from .parser import parse_pattern
from .printer import format_pattern
from .validate import CheckedPattern, TaxonomyTags, validate
from .files import PatternBlock, load_pattern_file, parse_pattern_blocks

__all__ = [
    "Aggregate", "AttrRef", "Condition", "Duration", "EventTerm", "Expr",
    "FromClause", "Join", "Number", "PatternAst", "Seq", "TriplePatternAst",
    "Window", "parse_pattern", "format_pattern", "CheckedPattern",
    "TaxonomyTags", "validate", "PatternBlock", "load_pattern_file",
    "parse_pattern_blocks",
]
