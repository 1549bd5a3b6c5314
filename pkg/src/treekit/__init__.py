"""Finite meet-trees, structural Ramsey checks and tree-indexed families."""

from .tree_core import (
    LanguageTag,
    MeetTree,
    QfTypeCode,
    TreeError,
    cone_leaves,
    format_tree,
    is_fan,
    leaf_pattern_X,
    meet,
    meet_closure,
    parse_tree,
    qftp,
    same_type_implication,
)

__version__ = "0.1.0"

__all__ = [
    "LanguageTag",
    "MeetTree",
    "QfTypeCode",
    "TreeError",
    "cone_leaves",
    "format_tree",
    "is_fan",
    "leaf_pattern_X",
    "meet",
    "meet_closure",
    "parse_tree",
    "qftp",
    "same_type_implication",
    "__version__",
]
