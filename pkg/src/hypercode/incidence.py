"""Typed token-hyperedge incidence model.

A :class:`TokenizedHypergraph` couples a token sequence with sparse COO
membership pairs ``(token_id, hyperedge_id)`` and a type tag per hyperedge.
Values are immutable; every operation returns a new graph.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable


class HyperedgeType(str, Enum):
    """The three token-correlation classes a graph can carry."""

    AST_FAMILY = "ast_family"
    LEXICAL = "lexical"
    LINE = "line"


TYPE_ORDER: tuple[HyperedgeType, ...] = (
    HyperedgeType.AST_FAMILY,
    HyperedgeType.LEXICAL,
    HyperedgeType.LINE,
)

TYPE_INDEX: dict[HyperedgeType, int] = {t: i for i, t in enumerate(TYPE_ORDER)}

# Minimum member count per type at generation time. Post-truncation graphs
# relax the ast_family/lexical minimum to 2 (see TokenizedHypergraph.truncated).
GENERATION_MIN_SIZE: dict[HyperedgeType, int] = {
    HyperedgeType.AST_FAMILY: 3,
    HyperedgeType.LEXICAL: 3,
    HyperedgeType.LINE: 1,
}


@dataclass(frozen=True)
class TokenizedHypergraph:
    """Token sequence plus typed COO incidence.

    ``token_count`` is authoritative: after :func:`offset_tokens` pads the
    sequence for host-owned special positions, those positions hold empty
    strings in ``tokens`` and ``None`` in ``line_of_token``.

    ``incidence`` is kept sorted by ``(hyperedge_id, token_id)``; the
    constructor canonicalizes whatever order it is given.
    """

    tokens: tuple[str, ...]
    token_count: int
    incidence: tuple[tuple[int, int], ...]
    hyperedge_types: tuple[HyperedgeType, ...]
    line_of_token: tuple[int | None, ...] | None
    source_language: str
    truncated: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        pairs = tuple(
            sorted(((int(t), int(h)) for t, h in self.incidence), key=lambda p: (p[1], p[0]))
        )
        object.__setattr__(self, "incidence", pairs)
        object.__setattr__(
            self, "hyperedge_types", tuple(HyperedgeType(t) for t in self.hyperedge_types)
        )
        if self.line_of_token is not None:
            object.__setattr__(self, "line_of_token", tuple(self.line_of_token))

    @property
    def hyperedge_count(self) -> int:
        return len(self.hyperedge_types)

    def members(self) -> list[list[int]]:
        """Token ids of each hyperedge, indexed by hyperedge id."""
        out: list[list[int]] = [[] for _ in range(self.hyperedge_count)]
        for tok, he in self.incidence:
            if 0 <= he < self.hyperedge_count:
                out[he].append(tok)
        return out


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[tuple[str, str], ...]


def empty_graph(source_language: str) -> TokenizedHypergraph:
    return TokenizedHypergraph(
        tokens=(),
        token_count=0,
        incidence=(),
        hyperedge_types=(),
        line_of_token=(),
        source_language=source_language,
    )


def validate(g: TokenizedHypergraph) -> ValidationReport:
    """Collect every structural violation; an empty list means the graph is sound."""
    violations: list[tuple[str, str]] = []
    n, e = g.token_count, g.hyperedge_count

    if n < 0:
        violations.append(("negative_token_count", f"token_count={n}"))
    if len(g.tokens) != n:
        violations.append(
            ("token_list_length", f"len(tokens)={len(g.tokens)} but token_count={n}")
        )
    if g.line_of_token is not None:
        if len(g.line_of_token) != n:
            violations.append(
                ("line_map_length", f"len(line_of_token)={len(g.line_of_token)} != {n}")
            )
        for i, ln in enumerate(g.line_of_token):
            if ln is not None and ln < 1:
                violations.append(("line_not_positive", f"line_of_token[{i}]={ln}"))

    seen: set[tuple[int, int]] = set()
    sizes = [0] * e
    for tok, he in g.incidence:
        if not 0 <= tok < n:
            violations.append(("token_id_out_of_range", f"pair ({tok}, {he}) with N={n}"))
        if not 0 <= he < e:
            violations.append(("hyperedge_id_out_of_range", f"pair ({tok}, {he}) with E={e}"))
            continue
        if (tok, he) in seen:
            violations.append(("duplicate_incidence_pair", f"pair ({tok}, {he})"))
        seen.add((tok, he))
        sizes[he] += 1

    min_nonline = 2 if g.truncated else 3
    for he, size in enumerate(sizes):
        kind = g.hyperedge_types[he]
        if size == 0:
            violations.append(("empty_hyperedge", f"hyperedge {he} has no members"))
        elif kind is not HyperedgeType.LINE and size < min_nonline:
            violations.append(
                (f"{kind.value}_size_below_minimum", f"hyperedge {he} has {size} members")
            )

    return ValidationReport(ok=not violations, violations=tuple(violations))


def _renumber(
    g: TokenizedHypergraph,
    keep: Iterable[int],
    pairs: Iterable[tuple[int, int]],
) -> tuple[tuple[tuple[int, int], ...], tuple[HyperedgeType, ...]]:
    """Renumber hyperedge ids contiguously, preserving original relative order."""
    remap = {old: new for new, old in enumerate(sorted(set(keep)))}
    new_pairs = tuple((tok, remap[he]) for tok, he in pairs if he in remap)
    new_types = tuple(g.hyperedge_types[old] for old in sorted(remap))
    return new_pairs, new_types


def truncate_remap(g: TokenizedHypergraph, max_tokens: int) -> TokenizedHypergraph:
    """Cut the token sequence at ``max_tokens`` and prune the incidence.

    Hyperedges left with fewer than 2 members are dropped; survivors are
    renumbered contiguously. The result carries ``truncated=True`` so that
    validation accepts size-2 ast_family/lexical hyperedges.
    """
    if max_tokens < 0:
        raise ValueError(f"max_tokens must be >= 0, got {max_tokens}")
    if max_tokens >= g.token_count:
        return g

    surviving = [(tok, he) for tok, he in g.incidence if tok < max_tokens]
    sizes: dict[int, int] = {}
    for _, he in surviving:
        sizes[he] = sizes.get(he, 0) + 1
    keep = [he for he, size in sizes.items() if size >= 2]
    pairs, types = _renumber(g, keep, surviving)

    return TokenizedHypergraph(
        tokens=g.tokens[:max_tokens],
        token_count=max_tokens,
        incidence=pairs,
        hyperedge_types=types,
        line_of_token=None if g.line_of_token is None else g.line_of_token[:max_tokens],
        source_language=g.source_language,
        truncated=True,
    )


def offset_tokens(g: TokenizedHypergraph, offset: int, new_total: int) -> TokenizedHypergraph:
    """Shift all token ids by ``offset`` inside a sequence of ``new_total`` positions.

    New positions belong to the host (special tokens): they hold "" in
    ``tokens``, ``None`` in ``line_of_token``, and join no hyperedge.
    """
    if offset < 0:
        raise ValueError(f"offset must be >= 0, got {offset}")
    if offset + g.token_count > new_total:
        raise ValueError(
            f"offset overflow: offset={offset} + N={g.token_count} exceeds new_total={new_total}"
        )
    if offset == 0 and new_total == g.token_count:
        return g

    pad_tail = new_total - offset - g.token_count
    line_map = None
    if g.line_of_token is not None:
        line_map = (None,) * offset + g.line_of_token + (None,) * pad_tail
    return TokenizedHypergraph(
        tokens=("",) * offset + g.tokens + ("",) * pad_tail,
        token_count=new_total,
        incidence=tuple((tok + offset, he) for tok, he in g.incidence),
        hyperedge_types=g.hyperedge_types,
        line_of_token=line_map,
        source_language=g.source_language,
        truncated=g.truncated,
    )


def filter_types(
    g: TokenizedHypergraph, enabled: Iterable[HyperedgeType]
) -> TokenizedHypergraph:
    """Keep only hyperedges whose type is enabled; tokens are untouched."""
    enabled_set = {HyperedgeType(t) for t in enabled}
    keep = [he for he, t in enumerate(g.hyperedge_types) if t in enabled_set]
    if len(keep) == g.hyperedge_count:
        return g
    pairs, types = _renumber(g, keep, g.incidence)
    return replace(g, incidence=pairs, hyperedge_types=types)


def to_json_dict(g: TokenizedHypergraph) -> dict:
    doc: dict = {
        "tokens": list(g.tokens),
        "token_count": g.token_count,
        "incidence": [[tok, he] for tok, he in g.incidence],
        "hyperedge_types": [t.value for t in g.hyperedge_types],
        "line_of_token": None if g.line_of_token is None else list(g.line_of_token),
        "source_language": g.source_language,
    }
    if g.truncated:
        doc["truncated"] = True
    return doc


def to_json(g: TokenizedHypergraph) -> str:
    """Canonical UTF-8 JSON: fixed key order, compact separators, no floats."""
    return json.dumps(to_json_dict(g), ensure_ascii=False, separators=(",", ":"))


_KNOWN_KEYS = {
    "tokens",
    "token_count",
    "incidence",
    "hyperedge_types",
    "line_of_token",
    "source_language",
    "truncated",
}


def from_json_dict(doc: dict) -> TokenizedHypergraph:
    if not isinstance(doc, dict):
        raise ValueError("hypergraph JSON must be an object")
    unknown = set(doc) - _KNOWN_KEYS
    if unknown:
        raise ValueError(f"unknown hypergraph JSON keys: {sorted(unknown)}")
    missing = (_KNOWN_KEYS - {"truncated"}) - set(doc)
    if missing:
        raise ValueError(f"missing hypergraph JSON keys: {sorted(missing)}")
    try:
        types = tuple(HyperedgeType(t) for t in doc["hyperedge_types"])
    except ValueError as err:
        raise ValueError(f"bad hyperedge type: {err}") from None
    incidence = doc["incidence"]
    if not all(isinstance(p, (list, tuple)) and len(p) == 2 for p in incidence):
        raise ValueError("incidence entries must be [token_id, hyperedge_id] pairs")
    line_map = doc["line_of_token"]
    return TokenizedHypergraph(
        tokens=tuple(doc["tokens"]),
        token_count=int(doc["token_count"]),
        incidence=tuple((int(t), int(h)) for t, h in incidence),
        hyperedge_types=types,
        line_of_token=None if line_map is None else tuple(line_map),
        source_language=str(doc["source_language"]),
        truncated=bool(doc.get("truncated", False)),
    )


def from_json(text: str) -> TokenizedHypergraph:
    return from_json_dict(json.loads(text))
