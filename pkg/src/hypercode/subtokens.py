"""Subword tokenization of leaf text.

Two tokenizer kinds are supported:

* ``byte_level_bpe`` — loaded from a vocab+merges JSON file. Text is UTF-8
  encoded and each byte mapped into a printable unicode alphabet (the usual
  byte-level convention: printable latin bytes map to themselves, every other
  byte to a codepoint at 256+n), then merge rules are applied lowest rank
  first. Detokenization inverts the byte mapping, so round trips are
  byte-exact.
* ``fallback`` — dependency-free and deterministic: whitespace runs stay
  single tokens, every other punctuation character is its own token, and
  alphanumeric runs split at lower-to-upper camel-case boundaries.
  Concatenating the output reproduces the input exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path


def _byte_to_unicode() -> dict[int, str]:
    printable = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(ord("\xa1"), ord("\xac") + 1))
        + list(range(ord("\xae"), ord("\xff") + 1))
    )
    codes = printable[:]
    bump = 0
    for b in range(256):
        if b not in printable:
            printable.append(b)
            codes.append(256 + bump)
            bump += 1
    return dict(zip(printable, (chr(c) for c in codes)))


BYTE_TO_UNICODE: dict[int, str] = _byte_to_unicode()
UNICODE_TO_BYTE: dict[str, int] = {c: b for b, c in BYTE_TO_UNICODE.items()}
BYTE_ALPHABET: tuple[str, ...] = tuple(BYTE_TO_UNICODE[b] for b in range(256))


@dataclass(frozen=True)
class Tokenizer:
    """Immutable tokenizer; ``kind`` is ``byte_level_bpe`` or ``fallback``."""

    kind: str
    vocab: dict[str, int] | None = None
    merges: tuple[tuple[str, str], ...] | None = None
    _ranks: dict[tuple[str, str], int] = field(default_factory=dict, repr=False)

    def tokenize(self, text: str) -> list[str]:
        if not text:
            return []
        if self.kind == "fallback":
            return _fallback_tokenize(text)
        return _bpe_tokenize(text, self._ranks)

    def detokenize(self, tokens: list[str]) -> str:
        if self.kind == "fallback":
            return "".join(tokens)
        data = bytes(UNICODE_TO_BYTE[ch] for tok in tokens for ch in tok)
        return data.decode("utf-8")

    def vocab_id(self, token: str) -> int | None:
        if self.vocab is None:
            return None
        return self.vocab.get(token)


def fallback_tokenizer() -> Tokenizer:
    return Tokenizer(kind="fallback")


def _fallback_tokenize(text: str) -> list[str]:
    out: list[str] = []
    run = ""
    run_is_space = False

    def flush_word(word: str) -> None:
        # Split an alphanumeric run before each upper that follows a lower.
        start = 0
        for i in range(1, len(word)):
            if word[i - 1].islower() and word[i].isupper():
                out.append(word[start:i])
                start = i
        out.append(word[start:])

    for ch in text:
        if ch.isspace():
            if run and not run_is_space:
                flush_word(run)
                run = ""
            run += ch
            run_is_space = True
        elif ch.isalnum():
            if run and run_is_space:
                out.append(run)
                run = ""
            run += ch
            run_is_space = False
        else:
            if run:
                if run_is_space:
                    out.append(run)
                else:
                    flush_word(run)
                run = ""
            out.append(ch)
    if run:
        if run_is_space:
            out.append(run)
        else:
            flush_word(run)
    return out


def _bpe_tokenize(text: str, ranks: dict[tuple[str, str], int]) -> list[str]:
    symbols = [BYTE_TO_UNICODE[b] for b in text.encode("utf-8")]
    while len(symbols) > 1:
        pairs = set(zip(symbols, symbols[1:]))
        best = min(pairs, key=lambda p: ranks.get(p, _NO_RANK))
        if best not in ranks:
            break
        merged: list[str] = []
        i = 0
        while i < len(symbols):
            if (
                i + 1 < len(symbols)
                and symbols[i] == best[0]
                and symbols[i + 1] == best[1]
            ):
                merged.append(best[0] + best[1])
                i += 2
            else:
                merged.append(symbols[i])
                i += 1
        symbols = merged
    return symbols


_NO_RANK = float("inf")


def load_vocabulary(path: str | Path) -> Tokenizer:
    """Load a byte-level BPE tokenizer from the documented JSON format.

    The file is an object ``{"vocab": {token: id}, "merges": ["a b", ...],
    "byte_level": true}``. Every merge operand must be a base byte symbol or
    the result of an earlier merge, every merge result must be in the vocab,
    and the vocab must cover the full 256-symbol byte alphabet.
    """
    with open(path, "rb") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as err:
            raise ValueError(f"malformed vocabulary file {path}: {err}") from None
    if not isinstance(doc, dict):
        raise ValueError("malformed vocabulary file: top level must be an object")
    unknown = set(doc) - {"vocab", "merges", "byte_level"}
    if unknown:
        raise ValueError(f"malformed vocabulary file: unknown keys {sorted(unknown)}")
    if doc.get("byte_level") is not True:
        raise ValueError("malformed vocabulary file: field 'byte_level' must be true")
    vocab = doc.get("vocab")
    if not isinstance(vocab, dict) or not all(
        isinstance(k, str) and isinstance(v, int) for k, v in vocab.items()
    ):
        raise ValueError("malformed vocabulary file: field 'vocab' must map token -> int id")
    ids = list(vocab.values())
    if len(set(ids)) != len(ids):
        raise ValueError("malformed vocabulary file: field 'vocab' has duplicate ids")
    missing_bytes = [c for c in BYTE_ALPHABET if c not in vocab]
    if missing_bytes:
        raise ValueError(
            "malformed vocabulary file: field 'vocab' is missing "
            f"{len(missing_bytes)} byte-alphabet symbols (first: {missing_bytes[0]!r})"
        )
    raw_merges = doc.get("merges")
    if not isinstance(raw_merges, list):
        raise ValueError("malformed vocabulary file: field 'merges' must be a list")

    merges: list[tuple[str, str]] = []
    known: set[str] = set(BYTE_ALPHABET)
    seen: set[tuple[str, str]] = set()
    for i, rule in enumerate(raw_merges):
        if not isinstance(rule, str) or rule.count(" ") != 1:
            raise ValueError(f"malformed vocabulary file: merges[{i}] must be 'left right'")
        left, right = rule.split(" ")
        if not left or not right:
            raise ValueError(f"malformed vocabulary file: merges[{i}] has an empty side")
        if (left, right) in seen:
            raise ValueError(f"duplicate merge rule at merges[{i}]: {rule!r}")
        seen.add((left, right))
        if left not in known or right not in known:
            raise ValueError(
                f"malformed vocabulary file: merges[{i}] uses a symbol no earlier "
                f"rule produces: {rule!r}"
            )
        result = left + right
        if result not in vocab:
            raise ValueError(
                f"malformed vocabulary file: merges[{i}] result {result!r} is not in vocab"
            )
        known.add(result)
        merges.append((left, right))

    ranks = {pair: i for i, pair in enumerate(merges)}
    return Tokenizer(
        kind="byte_level_bpe",
        vocab=dict(vocab),
        merges=tuple(merges),
        _ranks=ranks,
    )


def demo_vocabulary_path() -> Path:
    """Path of the bundled demonstration vocabulary."""
    return Path(str(resources.files("hypercode").joinpath("assets/demo_vocab.json")))


def load_demo_vocabulary() -> Tokenizer:
    return load_vocabulary(demo_vocabulary_path())
