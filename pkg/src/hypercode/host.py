"""Tiny frozen transformer host, clone-detection head, and adapter trainer.

The encoder is a seeded, randomly initialized post-norm transformer. Its
weights stay frozen through training; one adapter sits after each block and
the bottleneck carry ``o`` flows between them. Clone classification follows
the usual encoder recipe: the position-0 hidden state of each snippet is the
code vector, the two vectors are concatenated and fed to a two-layer MLP.

Everything here is desk scale: numpy forward/backward, one example at a
time, deterministic for a fixed seed.
"""

from __future__ import annotations

import hashlib
import json
import string
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .adapter import (
    ActivationTape,
    AdapterParameters,
    IncidenceArrays,
    PlmShapeConfig,
    adapter_backward,
    adapter_forward,
    init_parameters,
)
from .generator import DEFAULT_CONFIG, GeneratorConfig, generate
from .incidence import HyperedgeType, TokenizedHypergraph, filter_types, offset_tokens, truncate_remap
from .numerics import (
    Array,
    cross_entropy_backward,
    cross_entropy_with_logits,
    layer_norm,
    layer_norm_backward,
    relu,
    relu_backward,
    softmax,
    softmax_backward,
)
from .subtokens import Tokenizer, fallback_tokenizer

BOS_ID = 0
EOS_ID = 1
_RESERVED_IDS = 2


@dataclass(frozen=True)
class FrozenEncoderConfig:
    # Three layers minimum for the clone demo: hypergraph features surface in
    # non-start rows of layer l+1 and need a later block to mix them into the
    # position-0 readout, so only adapters 1..L-2 can influence it.
    layers: int = 3
    hidden: int = 32
    heads: int = 2
    ffn: int = 64
    vocab_size: int = 512
    max_len: int = 128
    seed: int = 0

    def __post_init__(self) -> None:
        if self.hidden % self.heads != 0:
            raise ValueError("hidden must be divisible by heads")


@dataclass
class _BlockWeights:
    wq: Array
    wk: Array
    wv: Array
    wo: Array
    gamma1: Array
    beta1: Array
    w1: Array
    b1: Array
    w2: Array
    b2: Array
    gamma2: Array
    beta2: Array


class FrozenEncoder:
    """Randomly initialized transformer encoder; weights are never trained."""

    def __init__(self, config: FrozenEncoderConfig) -> None:
        self.config = config
        rng = np.random.default_rng(config.seed)
        c, f = config.hidden, config.ffn
        su = 1.0 / np.sqrt(c)
        # Token content must dominate position noise, and attention should be
        # non-uniform at init, or random features barely distinguish inputs.
        self.embedding = rng.normal(0.0, 1.5, size=(config.vocab_size, c))
        self.positions = rng.normal(0.0, 0.05, size=(config.max_len, c))
        self.blocks: list[_BlockWeights] = []
        for _ in range(config.layers):
            self.blocks.append(
                _BlockWeights(
                    wq=rng.uniform(-3.0 * su, 3.0 * su, (c, c)),
                    wk=rng.uniform(-3.0 * su, 3.0 * su, (c, c)),
                    wv=rng.uniform(-su, su, (c, c)),
                    wo=rng.uniform(-su, su, (c, c)),
                    gamma1=np.ones(c),
                    beta1=np.zeros(c),
                    w1=rng.uniform(-su, su, (f, c)),
                    b1=np.zeros(f),
                    w2=rng.uniform(-1.0 / np.sqrt(f), 1.0 / np.sqrt(f), (c, f)),
                    b2=np.zeros(c),
                    gamma2=np.ones(c),
                    beta2=np.zeros(c),
                )
            )

    def weight_arrays(self) -> list[Array]:
        out = [self.embedding, self.positions]
        for blk in self.blocks:
            out.extend(
                [
                    blk.wq, blk.wk, blk.wv, blk.wo,
                    blk.gamma1, blk.beta1,
                    blk.w1, blk.b1, blk.w2, blk.b2,
                    blk.gamma2, blk.beta2,
                ]
            )
        return out

    def digest(self) -> str:
        h = hashlib.sha256()
        for arr in self.weight_arrays():
            h.update(np.ascontiguousarray(arr, dtype=np.float64).tobytes())
        return h.hexdigest()


@dataclass
class _BlockTape:
    h: Array
    q: Array
    k: Array
    v: Array
    attn: Array
    ctx_flat: Array
    ln1_cache: tuple
    h1: Array
    ffn_pre: Array
    ffn_act: Array
    ln2_cache: tuple


def _split_heads(x: Array, heads: int) -> Array:
    n, c = x.shape
    return x.reshape(n, heads, c // heads).transpose(1, 0, 2)


def _merge_heads(x: Array) -> Array:
    heads, n, dh = x.shape
    return x.transpose(1, 0, 2).reshape(n, heads * dh)


def _block_forward(h: Array, blk: _BlockWeights, heads: int) -> tuple[Array, _BlockTape]:
    dh = h.shape[1] // heads
    q = _split_heads(h @ blk.wq.T, heads)
    k = _split_heads(h @ blk.wk.T, heads)
    v = _split_heads(h @ blk.wv.T, heads)
    scores = q @ k.transpose(0, 2, 1) / np.sqrt(dh)
    attn = softmax(scores, axis=-1)
    ctx_flat = _merge_heads(attn @ v)
    attn_out = ctx_flat @ blk.wo.T
    h1, ln1_cache = layer_norm(h + attn_out, blk.gamma1, blk.beta1)
    ffn_pre = h1 @ blk.w1.T + blk.b1
    ffn_act = relu(ffn_pre)
    out = ffn_act @ blk.w2.T + blk.b2
    h2, ln2_cache = layer_norm(h1 + out, blk.gamma2, blk.beta2)
    tape = _BlockTape(h, q, k, v, attn, ctx_flat, ln1_cache, h1, ffn_pre, ffn_act, ln2_cache)
    return h2, tape


def _block_backward(grad_out: Array, tape: _BlockTape, blk: _BlockWeights, heads: int) -> Array:
    """Gradient w.r.t. the block input; frozen weights receive no update."""
    dh = tape.h.shape[1] // heads
    grad_r2, _, _ = layer_norm_backward(grad_out, tape.ln2_cache)
    grad_h1 = grad_r2.copy()
    grad_act = grad_r2 @ blk.w2
    grad_pre = relu_backward(grad_act, tape.ffn_pre)
    grad_h1 += grad_pre @ blk.w1
    grad_r1, _, _ = layer_norm_backward(grad_h1, tape.ln1_cache)
    grad_h = grad_r1.copy()
    grad_ctx = _split_heads(grad_r1 @ blk.wo, heads)
    grad_attn = grad_ctx @ tape.v.transpose(0, 2, 1)
    grad_v = tape.attn.transpose(0, 2, 1) @ grad_ctx
    grad_scores = softmax_backward(grad_attn, tape.attn, axis=-1)
    grad_q = grad_scores @ tape.k / np.sqrt(dh)
    grad_k = grad_scores.transpose(0, 2, 1) @ tape.q / np.sqrt(dh)
    grad_h += _merge_heads(grad_q) @ blk.wq
    grad_h += _merge_heads(grad_k) @ blk.wk
    grad_h += _merge_heads(grad_v) @ blk.wv
    return grad_h


@dataclass
class EncoderTape:
    block_tapes: list[_BlockTape]
    adapter_tapes: list[ActivationTape] | None


def encoder_forward(
    token_ids: Array,
    g: TokenizedHypergraph | IncidenceArrays | None,
    encoder: FrozenEncoder,
    adapters: list[AdapterParameters] | None,
    training: bool = False,
) -> tuple[Array, EncoderTape | None]:
    """Run the frozen encoder with one adapter after each block.

    With ``adapters=None`` the plain encoder runs; a freshly initialized
    adapter stack leaves the output bit-identical to that.
    """
    token_ids = np.asarray(token_ids, dtype=np.int64)
    n = token_ids.shape[0]
    cfg = encoder.config
    if n > cfg.max_len:
        raise ValueError(f"sequence of {n} tokens exceeds maximum length {cfg.max_len}")
    if adapters is not None and len(adapters) != cfg.layers:
        raise ValueError("need exactly one adapter per encoder layer")
    inc = None
    if adapters is not None:
        if g is None:
            raise ValueError("adapters need the token hypergraph")
        inc = g if isinstance(g, IncidenceArrays) else IncidenceArrays.from_hypergraph(g)
        if inc.token_count != n:
            raise ValueError("hypergraph token count does not match the sequence")

    h = encoder.embedding[token_ids] + encoder.positions[:n]
    block_tapes: list[_BlockTape] = []
    adapter_tapes: list[ActivationTape] = []
    o_prev: Array | None = None
    for layer, blk in enumerate(encoder.blocks):
        h, btape = _block_forward(h, blk, cfg.heads)
        if training:
            block_tapes.append(btape)
        if adapters is not None:
            h, o_prev, atape = adapter_forward(h, o_prev, inc, adapters[layer], training)
            if training:
                adapter_tapes.append(atape)
    if not training:
        return h, None
    return h, EncoderTape(block_tapes, adapter_tapes if adapters is not None else None)


def encoder_backward(
    grad_hidden: Array,
    tape: EncoderTape,
    encoder: FrozenEncoder,
) -> list[AdapterParameters] | None:
    """Backpropagate to the adapters; frozen weights only relay the gradient."""
    heads = encoder.config.heads
    layers = len(encoder.blocks)
    adapter_grads: list[AdapterParameters] | None = None
    grad_h = np.asarray(grad_hidden, dtype=np.float64)
    grad_o: Array | None = None
    if tape.adapter_tapes is not None:
        adapter_grads = [None] * layers  # type: ignore[list-item]
    for layer in range(layers - 1, -1, -1):
        if tape.adapter_tapes is not None:
            atape = tape.adapter_tapes[layer]
            if grad_o is None:
                grad_o = np.zeros_like(atape.o)
            grad_h, grad_o, gparams = adapter_backward(atape, grad_h, grad_o)
            adapter_grads[layer] = gparams  # type: ignore[index]
        grad_h = _block_backward(grad_h, tape.block_tapes[layer], encoder.blocks[layer], heads)
    return adapter_grads


# --- clone pipeline ----------------------------------------------------------


@dataclass(frozen=True)
class CloneExample:
    code_a: str
    code_b: str
    label: str  # "clone" | "not_clone"

    def __post_init__(self) -> None:
        if self.label not in ("clone", "not_clone"):
            raise ValueError(f"bad label {self.label!r}")

    @property
    def is_clone(self) -> bool:
        return self.label == "clone"


def save_dataset(examples: Sequence[CloneExample], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(
                json.dumps(
                    {"code_a": ex.code_a, "code_b": ex.code_b, "label": ex.label},
                    ensure_ascii=False,
                )
                + "\n"
            )


def load_dataset(path: str | Path) -> list[CloneExample]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                doc = json.loads(line)
                out.append(CloneExample(doc["code_a"], doc["code_b"], doc["label"]))
    return out


@dataclass(frozen=True)
class PreparedSnippet:
    token_ids: Array
    incidence: IncidenceArrays


@dataclass
class ClonePipeline:
    """Extraction config, frozen encoder, adapters, and classifier head."""

    language: str
    tokenizer: Tokenizer
    gen_config: GeneratorConfig
    encoder: FrozenEncoder
    adapters: list[AdapterParameters] | None
    head: dict[str, Array]
    enabled_types: frozenset[HyperedgeType]
    bottleneck: int
    _cache: dict[str, PreparedSnippet] = field(default_factory=dict, repr=False)

    def prepare(self, source: str) -> PreparedSnippet:
        hit = self._cache.get(source)
        if hit is not None:
            return hit
        graph = generate(source, self.language, self.tokenizer, self.gen_config)
        graph = filter_types(graph, self.enabled_types)
        graph = truncate_remap(graph, self.encoder.config.max_len - 2)
        n = graph.token_count
        graph = offset_tokens(graph, 1, n + 2)
        vocab = self.encoder.config.vocab_size
        ids = np.empty(n + 2, dtype=np.int64)
        ids[0] = BOS_ID
        ids[-1] = EOS_ID
        for i, tok in enumerate(graph.tokens[1:-1], start=1):
            ids[i] = _RESERVED_IDS + zlib.crc32(tok.encode("utf-8")) % (vocab - _RESERVED_IDS)
        prep = PreparedSnippet(ids, IncidenceArrays.from_hypergraph(graph))
        self._cache[source] = prep
        return prep

    def snippet_vector(self, source: str) -> Array:
        prep = self.prepare(source)
        hidden, _ = encoder_forward(prep.token_ids, prep.incidence, self.encoder, self.adapters)
        return hidden[0]

    def trainable_tensors(self) -> dict[str, Array]:
        out: dict[str, Array] = {}
        if self.adapters is not None:
            for layer_no, params in enumerate(self.adapters, start=1):
                for name, value in params.tensors().items():
                    out[f"adapter.layer{layer_no}.{name}"] = value
        for name, value in self.head.items():
            out[f"head.{name}"] = value
        return out

    def trainable_digest(self) -> str:
        tensors = self.trainable_tensors()
        h = hashlib.sha256()
        for name in sorted(tensors):
            h.update(name.encode())
            h.update(np.ascontiguousarray(tensors[name]).tobytes())
        return h.hexdigest()


def _init_head(hidden: int, seed: int) -> dict[str, Array]:
    # Final layer starts at zero: an untrained head outputs probability 0.5.
    rng = np.random.default_rng(seed)
    width = 2 * hidden
    su = 1.0 / np.sqrt(2 * hidden)
    return {
        "W1": rng.uniform(-su, su, (width, 2 * hidden)),
        "b1": np.zeros(width),
        "W2": np.zeros((2, width)),
        "b2": np.zeros(2),
    }


ALL_TYPES: frozenset[HyperedgeType] = frozenset(HyperedgeType)


def build_clone_pipeline(
    seed: int,
    encoder_config: FrozenEncoderConfig | None = None,
    bottleneck: int = 8,
    enabled_types: Iterable[HyperedgeType] = ALL_TYPES,
    language: str = "java",
    tokenizer: Tokenizer | None = None,
    gen_config: GeneratorConfig = DEFAULT_CONFIG,
    with_adapters: bool = True,
) -> ClonePipeline:
    encoder_config = encoder_config or FrozenEncoderConfig(seed=seed)
    encoder = FrozenEncoder(encoder_config)
    adapters = None
    if with_adapters:
        shape = PlmShapeConfig(encoder_config.layers, encoder_config.hidden, bottleneck)
        adapters = init_parameters(shape, seed + 1)
    return ClonePipeline(
        language=language,
        tokenizer=tokenizer or fallback_tokenizer(),
        gen_config=gen_config,
        encoder=encoder,
        adapters=adapters,
        head=_init_head(encoder_config.hidden, seed + 2),
        enabled_types=frozenset(enabled_types),
        bottleneck=bottleneck,
    )


def _head_forward(head: dict[str, Array], pair_vector: Array) -> tuple[Array, Array, Array]:
    z = pair_vector[None, :]
    pre = z @ head["W1"].T + head["b1"]
    act = relu(pre)
    logits = act @ head["W2"].T + head["b2"]
    return logits, pre, act


def clone_classify(code_a: str, code_b: str, pipeline: ClonePipeline) -> float:
    """Probability that the two snippets are clones."""
    va = pipeline.snippet_vector(code_a)
    vb = pipeline.snippet_vector(code_b)
    logits, _, _ = _head_forward(pipeline.head, np.concatenate([va, vb]))
    return float(softmax(logits, axis=-1)[0, 1])


# --- synthetic clone corpus --------------------------------------------------

_CLASS_NAMES = (
    "Alpha", "Bravo", "Charlie", "Delta", "Echo", "Foxtrot", "Golf", "Hotel",
    "Kilo", "Lima", "Mike", "Oscar", "Papa", "Quebec", "Romeo", "Sierra",
)

_METHOD_NAMES = (
    "process", "compute", "resolve", "measure", "collect", "combine",
    "reduce", "evaluate", "scan", "summarize", "locate", "arrange",
)

_VAR_NAMES = (
    "total", "count", "index", "value", "result", "buffer", "limit",
    "cursor", "accum", "probe", "width", "depth", "left", "right", "mid",
)

_TEMPLATES = (
    string.Template(
        "class $cls {\n"
        "    int $fn(int $a) {\n"
        "        int $b = 0;\n"
        "        for (int $c = 0; $c < $a; $c++) {\n"
        "            $b += $c * $c;\n"
        "        }\n"
        "        return $b;\n"
        "    }\n"
        "}\n"
    ),
    string.Template(
        "class $cls {\n"
        "    int $fn(int $a) {\n"
        "        if ($a <= 1) {\n"
        "            return 1;\n"
        "        }\n"
        "        return $a * $fn($a - 1);\n"
        "    }\n"
        "}\n"
    ),
    string.Template(
        "class $cls {\n"
        "    int $fn(int $a, int $b, int $c) {\n"
        "        int $d = $a;\n"
        "        if ($b > $d) {\n"
        "            $d = $b;\n"
        "        }\n"
        "        if ($c > $d) {\n"
        "            $d = $c;\n"
        "        }\n"
        "        return $d;\n"
        "    }\n"
        "}\n"
    ),
    string.Template(
        "class $cls {\n"
        "    int $fn(int[] $a, int $b) {\n"
        "        int $c = 0;\n"
        "        while ($c < $a.length) {\n"
        "            if ($a[$c] == $b) {\n"
        "                return $c;\n"
        "            }\n"
        "            $c++;\n"
        "        }\n"
        "        return -1;\n"
        "    }\n"
        "}\n"
    ),
    string.Template(
        "class $cls {\n"
        "    String $fn(String[] $a) {\n"
        "        StringBuilder $b = new StringBuilder();\n"
        "        for (String $c : $a) {\n"
        "            $b.append($c);\n"
        "            $b.append(',');\n"
        "        }\n"
        "        return $b.toString();\n"
        "    }\n"
        "}\n"
    ),
    string.Template(
        "class $cls {\n"
        "    int[] $fn(int $a) {\n"
        "        int[] $b = new int[$a];\n"
        "        for (int $c = 0; $c < $a; $c++) {\n"
        "            $b[$c] = $c * 2 + 1;\n"
        "        }\n"
        "        return $b;\n"
        "    }\n"
        "}\n"
    ),
    string.Template(
        "class $cls {\n"
        "    int $fn(int $a, int $b) {\n"
        "        int $c = 0;\n"
        "        for (int $d = 0; $d < $a; $d++) {\n"
        "            for (int $e = 0; $e < $b; $e++) {\n"
        "                $c += $d * $e;\n"
        "            }\n"
        "        }\n"
        "        return $c;\n"
        "    }\n"
        "}\n"
    ),
    string.Template(
        "class $cls {\n"
        "    int $fn(String $a) {\n"
        "        try {\n"
        "            return Integer.parseInt($a.trim());\n"
        "        } catch (NumberFormatException $b) {\n"
        "            return 0;\n"
        "        }\n"
        "    }\n"
        "}\n"
    ),
)


@dataclass(frozen=True)
class _NameDraw:
    cls: str
    fn: str
    variables: tuple[str, ...]


def _draw_names(rng: np.random.Generator) -> _NameDraw:
    picked = rng.choice(len(_VAR_NAMES), size=8, replace=False)
    return _NameDraw(
        cls=_CLASS_NAMES[int(rng.integers(len(_CLASS_NAMES)))],
        fn=_METHOD_NAMES[int(rng.integers(len(_METHOD_NAMES)))],
        variables=tuple(_VAR_NAMES[int(i)] for i in picked),
    )


def _draw_disjoint_names(rng: np.random.Generator) -> tuple[_NameDraw, _NameDraw]:
    """Two identifier assignments with no name in common."""
    cls = rng.choice(len(_CLASS_NAMES), size=2, replace=False)
    fn = rng.choice(len(_METHOD_NAMES), size=2, replace=False)
    variables = rng.choice(len(_VAR_NAMES), size=14, replace=False)
    first = _NameDraw(
        _CLASS_NAMES[int(cls[0])],
        _METHOD_NAMES[int(fn[0])],
        tuple(_VAR_NAMES[int(i)] for i in variables[:7]),
    )
    second = _NameDraw(
        _CLASS_NAMES[int(cls[1])],
        _METHOD_NAMES[int(fn[1])],
        tuple(_VAR_NAMES[int(i)] for i in variables[7:]),
    )
    return first, second


def _instantiate(template: string.Template, names: _NameDraw) -> str:
    slots = sorted(
        {m.group("named") for m in template.pattern.finditer(template.template) if m.group("named")}
    )
    mapping: dict[str, str] = {}
    var_cursor = 0
    for slot in slots:
        if slot == "cls":
            mapping[slot] = names.cls
        elif slot == "fn":
            mapping[slot] = names.fn
        else:
            mapping[slot] = names.variables[var_cursor]
            var_cursor += 1
    return template.substitute(mapping)


def _reflow(source: str, rng: np.random.Generator) -> str:
    """Whitespace-only rewrite: indentation width and blank-line placement."""
    unit = int(rng.choice([2, 4, 8]))
    out_lines: list[str] = []
    for line in source.split("\n"):
        stripped = line.lstrip(" ")
        depth = (len(line) - len(stripped)) // 4
        out_lines.append(" " * (unit * depth) + stripped)
        if stripped and rng.random() < 0.25:
            out_lines.append("")
    return "\n".join(out_lines)


def make_synthetic_clone_set(seed: int, size: int) -> list[CloneExample]:
    """Deterministic 50/50 (+-1) clone corpus from structurally distinct templates.

    Clone pairs instantiate one template twice with disjoint identifier sets
    and independent whitespace reflow, so surface vocabulary is a poor clone
    signal. Non-clone pairs draw two different templates but share one
    identifier assignment, so matching names do not mean matching structure.
    """
    if size < 2:
        raise ValueError("size must be >= 2")
    rng = np.random.default_rng(seed)
    examples: list[CloneExample] = []
    for i in range(size):
        if i % 2 == 0:
            t = int(rng.integers(len(_TEMPLATES)))
            names_a, names_b = _draw_disjoint_names(rng)
            a = _reflow(_instantiate(_TEMPLATES[t], names_a), rng)
            b = _reflow(_instantiate(_TEMPLATES[t], names_b), rng)
            examples.append(CloneExample(a, b, "clone"))
        else:
            t1 = int(rng.integers(len(_TEMPLATES)))
            t2 = int(rng.integers(len(_TEMPLATES) - 1))
            if t2 >= t1:
                t2 += 1
            shared = _draw_names(rng)
            a = _reflow(_instantiate(_TEMPLATES[t1], shared), rng)
            b = _reflow(_instantiate(_TEMPLATES[t2], shared), rng)
            examples.append(CloneExample(a, b, "not_clone"))
    order = rng.permutation(size)
    return [examples[int(i)] for i in order]


# --- training ----------------------------------------------------------------


@dataclass(frozen=True)
class TrainingPreset:
    optimizer: str
    learning_rate: float
    batch_size: int
    epochs: int


# The two published full-scale recipes, plus the desk-scale default.
TRAINING_PRESETS: dict[str, TrainingPreset] = {
    "paper-summarization": TrainingPreset("adam", 1.0e-4, 64, 20),
    "paper-clone": TrainingPreset("adamw", 5.0e-5, 4, 10),
    "desk-demo": TrainingPreset("adamw", 3.0e-3, 8, 20),
}


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float


def evaluate(
    dataset: Sequence[CloneExample], pipeline: ClonePipeline, threshold: float = 0.5
) -> Metrics:
    """Binary precision/recall/F1 with "clone" as the positive class."""
    if not dataset:
        raise ValueError("dataset must be nonempty")
    tp = fp = fn = 0
    for ex in dataset:
        predicted = clone_classify(ex.code_a, ex.code_b, pipeline) > threshold
        if predicted and ex.is_clone:
            tp += 1
        elif predicted and not ex.is_clone:
            fp += 1
        elif not predicted and ex.is_clone:
            fn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return Metrics(precision, recall, f1)


class _AdamState:
    def __init__(self, tensors: dict[str, Array], decoupled_decay: bool, weight_decay: float):
        self.m = {k: np.zeros_like(v) for k, v in tensors.items()}
        self.v = {k: np.zeros_like(v) for k, v in tensors.items()}
        self.t = 0
        self.decoupled_decay = decoupled_decay
        self.weight_decay = weight_decay

    def step(
        self,
        tensors: dict[str, Array],
        grads: dict[str, Array],
        lr: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> None:
        self.t += 1
        correction1 = 1.0 - beta1**self.t
        correction2 = 1.0 - beta2**self.t
        for name, value in tensors.items():
            g = grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= beta1
            m += (1.0 - beta1) * g
            v *= beta2
            v += (1.0 - beta2) * g * g
            if self.decoupled_decay and self.weight_decay:
                value -= lr * self.weight_decay * value
            value -= lr * (m / correction1) / (np.sqrt(v / correction2) + eps)


@dataclass(frozen=True)
class TrainReport:
    epoch_losses: tuple[float, ...]
    val_f1_history: tuple[float, ...]
    best_epoch: int
    final_precision: float
    final_recall: float
    final_f1: float
    frozen_digest_before: str
    frozen_digest_after: str
    updated_digest: str

    def to_json_dict(self) -> dict:
        return {
            "epoch_losses": list(self.epoch_losses),
            "val_f1_history": list(self.val_f1_history),
            "best_epoch": self.best_epoch,
            "final_precision": self.final_precision,
            "final_recall": self.final_recall,
            "final_f1": self.final_f1,
            "frozen_digest_before": self.frozen_digest_before,
            "frozen_digest_after": self.frozen_digest_after,
            "updated_digest": self.updated_digest,
        }


def _pair_loss_and_grads(
    example: CloneExample, pipeline: ClonePipeline
) -> tuple[float, dict[str, Array]]:
    prep_a = pipeline.prepare(example.code_a)
    prep_b = pipeline.prepare(example.code_b)
    hid_a, tape_a = encoder_forward(
        prep_a.token_ids, prep_a.incidence, pipeline.encoder, pipeline.adapters, training=True
    )
    hid_b, tape_b = encoder_forward(
        prep_b.token_ids, prep_b.incidence, pipeline.encoder, pipeline.adapters, training=True
    )
    head = pipeline.head
    pair = np.concatenate([hid_a[0], hid_b[0]])
    logits, pre, act = _head_forward(head, pair)
    label = np.array([1 if example.is_clone else 0])
    loss, probs = cross_entropy_with_logits(logits, label)

    grad_logits = cross_entropy_backward(probs, label)
    grads: dict[str, Array] = {
        "head.W2": grad_logits.T @ act,
        "head.b2": grad_logits.sum(axis=0),
    }
    grad_act = grad_logits @ head["W2"]
    grad_pre = relu_backward(grad_act, pre)
    grads["head.W1"] = grad_pre.T @ pair[None, :]
    grads["head.b1"] = grad_pre.sum(axis=0)
    grad_pair = (grad_pre @ head["W1"])[0]

    c = pipeline.encoder.config.hidden
    for prep, tape, grad_vec in (
        (prep_a, tape_a, grad_pair[:c]),
        (prep_b, tape_b, grad_pair[c:]),
    ):
        grad_hidden = np.zeros((prep.token_ids.shape[0], c))
        grad_hidden[0] = grad_vec
        adapter_grads = encoder_backward(grad_hidden, tape, pipeline.encoder)
        if adapter_grads is not None:
            for layer_no, gparams in enumerate(adapter_grads, start=1):
                for name, value in gparams.tensors().items():
                    key = f"adapter.layer{layer_no}.{name}"
                    if key in grads:
                        grads[key] = grads[key] + value
                    else:
                        grads[key] = value
    return loss, grads


def train_adapters(
    train_set: Sequence[CloneExample],
    val_set: Sequence[CloneExample],
    pipeline: ClonePipeline,
    opt: str = "adamw",
    lr: float = 1.0e-3,
    epochs: int = 6,
    batch: int = 8,
    weight_decay: float = 0.01,
) -> TrainReport:
    """Train adapters and head; the encoder stays frozen throughout.

    The parameters with the best validation F1 are kept: after the last
    epoch the pipeline is restored to that checkpoint, and the reported
    final metrics are the checkpoint's validation metrics.
    """
    if not train_set:
        raise ValueError("training set must be nonempty")
    if opt not in ("adam", "adamw"):
        raise ValueError("opt must be 'adam' or 'adamw'")

    tensors = pipeline.trainable_tensors()
    state = _AdamState(tensors, decoupled_decay=(opt == "adamw"), weight_decay=weight_decay)
    frozen_before = pipeline.encoder.digest()

    def snapshot() -> dict[str, Array]:
        return {k: v.copy() for k, v in tensors.items()}

    best = snapshot()
    best_metrics = evaluate(val_set, pipeline) if val_set else Metrics(0.0, 0.0, 0.0)
    best_epoch = 0
    epoch_losses: list[float] = []
    val_history: list[float] = []

    for epoch in range(1, epochs + 1):
        running = 0.0
        seen = 0
        for start in range(0, len(train_set), batch):
            chunk = train_set[start : start + batch]
            accum: dict[str, Array] = {k: np.zeros_like(v) for k, v in tensors.items()}
            batch_loss = 0.0
            for ex in chunk:
                loss, grads = _pair_loss_and_grads(ex, pipeline)
                if not np.isfinite(loss):
                    raise FloatingPointError(
                        f"non-finite loss in batch starting at example {start}"
                    )
                batch_loss += loss
                for name, value in grads.items():
                    accum[name] += value
            scale = 1.0 / len(chunk)
            for name in accum:
                accum[name] *= scale
            state.step(tensors, accum, lr)
            running += batch_loss
            seen += len(chunk)
        epoch_losses.append(running / seen)
        if val_set:
            metrics = evaluate(val_set, pipeline)
            val_history.append(metrics.f1)
            if metrics.f1 > best_metrics.f1:
                best_metrics = metrics
                best = snapshot()
                best_epoch = epoch

    # Restore the best-F1 checkpoint in place.
    if val_set:
        for name, value in tensors.items():
            value[...] = best[name]
        final = best_metrics
    else:
        final = Metrics(0.0, 0.0, 0.0)

    return TrainReport(
        epoch_losses=tuple(epoch_losses),
        val_f1_history=tuple(val_history),
        best_epoch=best_epoch,
        final_precision=final.precision,
        final_recall=final.recall,
        final_f1=final.f1,
        frozen_digest_before=frozen_before,
        frozen_digest_after=pipeline.encoder.digest(),
        updated_digest=pipeline.trainable_digest(),
    )
