"""Token and hyperedge extraction from source code.

One postorder pass over the concrete syntax tree drives everything. Visiting
a leaf tokenizes its text, appends the subword tokens to the sequence, opens
a lexical hyperedge when the leaf split into enough tokens, and files the
tokens under the hyperedge of the leaf's start line (one line hyperedge per
distinct line, created the first time the line is seen). Visiting an internal
node collects the token ids its subtree produced and, when there are enough,
opens an ast_family hyperedge over them before passing the ids upward.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from typing import Sequence

from .incidence import HyperedgeType, TokenizedHypergraph, TYPE_ORDER
from .parsing import LeafInfo, parse, postorder
from .subtokens import Tokenizer

AST_SCOPES = ("all_internal_nodes", "direct_parents_only")


@dataclass(frozen=True)
class GeneratorConfig:
    """Extraction knobs.

    ``min_tokens_for_hyperedge`` gates ast_family and lexical hyperedges
    (line hyperedges have no threshold). ``ast_scope`` selects whether every
    internal node owns a hyperedge over its whole subtree, or only over the
    tokens of its direct leaf children. ``max_ast_hyperedge_size`` caps
    ast_family hyperedges; larger groups are skipped.
    """

    min_tokens_for_hyperedge: int = 3
    ast_scope: str = "all_internal_nodes"
    include_comments: bool = True
    max_ast_hyperedge_size: int | None = None

    def __post_init__(self) -> None:
        if self.min_tokens_for_hyperedge < 2:
            raise ValueError("min_tokens_for_hyperedge must be >= 2")
        if self.ast_scope not in AST_SCOPES:
            raise ValueError(f"ast_scope must be one of {AST_SCOPES}")


DEFAULT_CONFIG = GeneratorConfig()


def _is_comment(leaf: LeafInfo) -> bool:
    return "comment" in leaf.kind


def generate(
    source: str,
    language: str,
    tokenizer: Tokenizer,
    config: GeneratorConfig = DEFAULT_CONFIG,
) -> TokenizedHypergraph:
    """Extract the typed token hypergraph of one snippet."""
    tree = parse(source, language)

    tokens: list[str] = []
    token_lines: list[int] = []
    pairs: list[tuple[int, int]] = []
    types: list[HyperedgeType] = []
    line_to_hyperedge: dict[int, int] = {}

    def new_hyperedge(kind: HyperedgeType, member_ids: Sequence[int]) -> None:
        he = len(types)
        types.append(kind)
        pairs.extend((tok, he) for tok in member_ids)

    def on_leaf(leaf: LeafInfo) -> tuple[bool, list[int]]:
        if not config.include_comments and _is_comment(leaf):
            return (True, [])
        sub = tokenizer.tokenize(leaf.text)
        if not sub:
            return (True, [])
        ids = list(range(len(tokens), len(tokens) + len(sub)))
        tokens.extend(sub)
        token_lines.extend([leaf.start_line] * len(sub))
        if len(ids) >= config.min_tokens_for_hyperedge:
            new_hyperedge(HyperedgeType.LEXICAL, ids)
        line_he = line_to_hyperedge.get(leaf.start_line)
        if line_he is None:
            new_hyperedge(HyperedgeType.LINE, ids)
            line_to_hyperedge[leaf.start_line] = len(types) - 1
        else:
            pairs.extend((tok, line_he) for tok in ids)
        return (True, ids)

    def on_internal(children: list[tuple[bool, list[int]]]) -> tuple[bool, list[int]]:
        subtree: list[int] = [tok for _, ids in children for tok in ids]
        if config.ast_scope == "direct_parents_only":
            scoped = [tok for is_leaf, ids in children if is_leaf for tok in ids]
        else:
            scoped = subtree
        cap = config.max_ast_hyperedge_size
        if len(scoped) >= config.min_tokens_for_hyperedge and (
            cap is None or len(scoped) <= cap
        ):
            new_hyperedge(HyperedgeType.AST_FAMILY, scoped)
        return (False, subtree)

    postorder(tree, on_leaf, on_internal)

    return TokenizedHypergraph(
        tokens=tuple(tokens),
        token_count=len(tokens),
        incidence=tuple(pairs),
        hyperedge_types=tuple(types),
        line_of_token=tuple(token_lines),
        source_language=language,
    )


def _two_decimals(value: Fraction) -> str:
    return str(
        (Decimal(value.numerator) / Decimal(value.denominator)).quantize(
            Decimal("0.01"), rounding=ROUND_HALF_EVEN
        )
    )


@dataclass(frozen=True)
class CorpusStats:
    """Exact per-snippet means over a corpus; parse failures are excluded."""

    snippet_count: int
    parse_failure_count: int
    total_tokens: int
    total_hyperedges: int
    total_by_type: dict[HyperedgeType, int]

    @property
    def avg_tokens(self) -> Fraction:
        return Fraction(self.total_tokens, self.snippet_count)

    @property
    def avg_hyperedges(self) -> Fraction:
        return Fraction(self.total_hyperedges, self.snippet_count)

    def avg_by_type(self, kind: HyperedgeType) -> Fraction:
        return Fraction(self.total_by_type[kind], self.snippet_count)

    def rows(self) -> list[tuple[str, str]]:
        """Label/value rows with the means rendered to 2 decimals."""
        out = [
            ("Snippets", str(self.snippet_count)),
            ("Parse failures", str(self.parse_failure_count)),
            ("Avg. tokens", _two_decimals(self.avg_tokens)),
            ("Avg. hyperedges", _two_decimals(self.avg_hyperedges)),
        ]
        for kind in TYPE_ORDER:
            out.append((f"Avg. {kind.value} hyperedges", _two_decimals(self.avg_by_type(kind))))
        return out


def stats(
    sources: Sequence[str],
    language: str,
    tokenizer: Tokenizer,
    config: GeneratorConfig = DEFAULT_CONFIG,
) -> CorpusStats:
    """Mean token and hyperedge counts over ``sources``.

    Snippets that raise during extraction are counted as parse failures and
    excluded from the means.
    """
    if not sources:
        raise ValueError("corpus must be nonempty")
    ok = 0
    failures = 0
    total_tokens = 0
    total_hyperedges = 0
    by_type = {kind: 0 for kind in TYPE_ORDER}
    for source in sources:
        try:
            graph = generate(source, language, tokenizer, config)
        except ValueError:
            failures += 1
            continue
        ok += 1
        total_tokens += graph.token_count
        total_hyperedges += graph.hyperedge_count
        for kind in graph.hyperedge_types:
            by_type[kind] += 1
    if ok == 0:
        raise ValueError("every snippet in the corpus failed to parse")
    return CorpusStats(
        snippet_count=ok,
        parse_failure_count=failures,
        total_tokens=total_tokens,
        total_hyperedges=total_hyperedges,
        total_by_type=by_type,
    )
