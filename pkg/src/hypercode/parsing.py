"""Grammar-driven concrete-syntax parsing with a postorder traversal.

Wraps tree-sitter for the six supported languages. A "leaf" is a node with
zero children and a nonempty byte span (zero-width error-recovery artifacts
are skipped); everything else, plus the root, is internal. Parse errors never
abort: error nodes are traversed like ordinary nodes and their text reaches
the tokenizer.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, TypeVar

from tree_sitter import Language, Parser

SUPPORTED_LANGUAGES: tuple[str, ...] = (
    "ruby",
    "javascript",
    "java",
    "go",
    "php",
    "python",
)

EXTENSION_LANGUAGES: dict[str, str] = {
    ".rb": "ruby",
    ".js": "javascript",
    ".java": "java",
    ".go": "go",
    ".php": "php",
    ".py": "python",
}


def _language_callable(language: str) -> Callable[[], Any]:
    if language == "ruby":
        import tree_sitter_ruby

        return tree_sitter_ruby.language
    if language == "javascript":
        import tree_sitter_javascript

        return tree_sitter_javascript.language
    if language == "java":
        import tree_sitter_java

        return tree_sitter_java.language
    if language == "go":
        import tree_sitter_go

        return tree_sitter_go.language
    if language == "php":
        import tree_sitter_php

        return tree_sitter_php.language_php
    if language == "python":
        import tree_sitter_python

        return tree_sitter_python.language
    raise ValueError(f"unsupported language: {language!r}")


@lru_cache(maxsize=None)
def _grammar(language: str) -> Language:
    return Language(_language_callable(language)())


def grammar_registry() -> dict[str, Language]:
    """Language identifier -> loaded grammar, for all supported languages."""
    return {name: _grammar(name) for name in SUPPORTED_LANGUAGES}


@dataclass(frozen=True)
class LeafInfo:
    """One concrete-syntax leaf: its text, 1-based start line, and byte span."""

    text: str
    start_line: int
    byte_span: tuple[int, int]
    kind: str
    lossy: bool = False


class SyntaxTree:
    """A parsed source buffer; ``root`` is the raw tree-sitter root node."""

    __slots__ = ("root", "source", "language", "_tree")

    def __init__(self, tree: Any, source: bytes, language: str) -> None:
        self._tree = tree
        self.root = tree.root_node
        self.source = source
        self.language = language


def parse(source: str, language: str) -> SyntaxTree:
    """Parse ``source`` with the named grammar; error nodes are retained."""
    if language not in SUPPORTED_LANGUAGES:
        raise ValueError(f"unsupported language: {language!r}")
    try:
        data = source.encode("utf-8")
    except UnicodeEncodeError as err:
        raise ValueError(f"invalid encoding: {err}") from None
    parser = Parser(_grammar(language))
    return SyntaxTree(parser.parse(data), data, language)


def _leaf_info(tree: SyntaxTree, node: Any) -> LeafInfo:
    raw = tree.source[node.start_byte : node.end_byte]
    try:
        text = raw.decode("utf-8")
        lossy = False
    except UnicodeDecodeError:
        text = raw.decode("utf-8", errors="replace")
        lossy = True
    return LeafInfo(
        text=text,
        start_line=node.start_point[0] + 1,
        byte_span=(node.start_byte, node.end_byte),
        kind=node.type,
        lossy=lossy,
    )


T = TypeVar("T")


def postorder(
    tree: SyntaxTree,
    on_leaf: Callable[[LeafInfo], T],
    on_internal: Callable[[list[T]], T],
) -> None:
    """Drive a left-to-right postorder walk, threading callback results upward.

    ``on_leaf`` fires for each leaf in source order; ``on_internal`` fires for
    each internal node after all of its children, receiving their results in
    order. The root always counts as internal and fires last.
    """
    root = tree.root

    # Iterative two-phase walk; recursion would overflow on deeply nested code.
    results: list[list[T]] = [[]]
    stack: list[tuple[Any, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        is_internal = node.child_count > 0 or node is root
        if not is_internal:
            if node.end_byte > node.start_byte:
                results[-1].append(on_leaf(_leaf_info(tree, node)))
            continue
        if expanded:
            child_results = results.pop()
            results[-1].append(on_internal(child_results))
        else:
            stack.append((node, True))
            results.append([])
            for child in reversed(node.children):
                stack.append((child, False))


def iter_leaves(tree: SyntaxTree) -> list[LeafInfo]:
    """All leaves in traversal order."""
    leaves: list[LeafInfo] = []
    postorder(tree, lambda leaf: leaves.append(leaf), lambda _children: None)
    return leaves
