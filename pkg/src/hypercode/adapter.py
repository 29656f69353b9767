"""Hypergraph-attention bottleneck adapter: forward, backward, accounting.

One adapter layer maps token hidden states ``h`` (N x C) to ``h'`` plus a
bottleneck-sized carry ``o`` (N x C_down) that the next layer's adapter mixes
into its own activation:

* down-project: ``d = h W_down^T + b_down``
* carry + relu: ``x = relu(d + o_prev)`` (first layer: ``relu(d)``)
* token -> hyperedge attention, scores ``q_type . x / sqrt(C_down)``
  normalized within each hyperedge, giving hyperedge vectors ``p``
* per-type linear transform: ``p' = p W_type^T + b_type``
* hyperedge -> token attention, scores ``x . p' / sqrt(C_down)`` normalized
  within each token's hyperedge set, giving the carry ``o`` (zero for tokens
  outside every hyperedge)
* up-project + residual: ``h' = x W_up^T + b_up + h``

``W_up`` and ``b_up`` start at zero, so a freshly initialized adapter is the
identity on ``h``. The backward pass is handwritten reverse-mode over the
:class:`ActivationTape` recorded by a training-mode forward.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .incidence import TYPE_INDEX, TYPE_ORDER, TokenizedHypergraph
from .numerics import (
    Array,
    SegmentIndex,
    segment_softmax,
    segment_softmax_backward,
    segment_weighted_sum,
    segment_weighted_sum_backward,
)


@dataclass(frozen=True)
class PlmShapeConfig:
    """Host-model shape: layer count, hidden width, bottleneck width."""

    layers: int
    hidden: int
    bottleneck: int = 64
    type_count: int = 3

    def __post_init__(self) -> None:
        if self.layers < 1:
            raise ValueError("layers must be >= 1")
        if not self.hidden >= self.bottleneck >= 1:
            raise ValueError("need hidden >= bottleneck >= 1")
        if self.type_count != len(TYPE_ORDER):
            raise ValueError(f"type_count must be {len(TYPE_ORDER)}")


@dataclass
class AdapterParameters:
    """Trainable tensors of one adapter layer.

    Per-type tensors are stacked along axis 0 in ``TYPE_ORDER`` order
    (ast_family, lexical, line).
    """

    w_down: Array  # (C_down, C)
    b_down: Array  # (C_down,)
    w_up: Array  # (C, C_down)
    b_up: Array  # (C,)
    q: Array  # (3, C_down)
    w_type: Array  # (3, C_down, C_down)
    b_type: Array  # (3, C_down)

    def tensors(self) -> dict[str, Array]:
        return {
            "W_down": self.w_down,
            "b_down": self.b_down,
            "W_up": self.w_up,
            "b_up": self.b_up,
            "q": self.q,
            "W_type": self.w_type,
            "b_type": self.b_type,
        }

    def zeros_like(self) -> "AdapterParameters":
        return AdapterParameters(
            **{
                field: np.zeros_like(value)
                for field, value in (
                    ("w_down", self.w_down),
                    ("b_down", self.b_down),
                    ("w_up", self.w_up),
                    ("b_up", self.b_up),
                    ("q", self.q),
                    ("w_type", self.w_type),
                    ("b_type", self.b_type),
                )
            }
        )


def init_parameters(cfg: PlmShapeConfig, seed: int) -> list[AdapterParameters]:
    """One parameter set per layer from a seeded generator.

    Fan-in uniform for the down-projection and the per-type transforms,
    small-normal queries, and exact zeros for the up-projection so the
    adapter starts as the identity map on the hidden states.
    """
    rng = np.random.default_rng(seed)
    c, cd, t = cfg.hidden, cfg.bottleneck, cfg.type_count
    out = []
    for _ in range(cfg.layers):
        out.append(
            AdapterParameters(
                w_down=rng.uniform(-1.0 / np.sqrt(c), 1.0 / np.sqrt(c), size=(cd, c)),
                b_down=np.zeros(cd),
                w_up=np.zeros((c, cd)),
                b_up=np.zeros(c),
                q=rng.normal(0.0, 0.02, size=(t, cd)),
                w_type=rng.uniform(-1.0 / np.sqrt(cd), 1.0 / np.sqrt(cd), size=(t, cd, cd)),
                b_type=np.zeros((t, cd)),
            )
        )
    return out


@dataclass(frozen=True)
class IncidenceArrays:
    """Incidence pairs of one graph as flat arrays, ready for the kernels."""

    token_ids: Array  # (nnz,) int64
    hyperedge_ids: Array  # (nnz,) int64
    type_of_hyperedge: Array  # (E,) int64, values index TYPE_ORDER
    token_count: int
    hyperedge_count: int

    @classmethod
    def from_hypergraph(cls, g: TokenizedHypergraph) -> "IncidenceArrays":
        nnz = len(g.incidence)
        toks = np.fromiter((p[0] for p in g.incidence), dtype=np.int64, count=nnz)
        hes = np.fromiter((p[1] for p in g.incidence), dtype=np.int64, count=nnz)
        types = np.fromiter(
            (TYPE_INDEX[t] for t in g.hyperedge_types), dtype=np.int64, count=g.hyperedge_count
        )
        return cls(toks, hes, types, g.token_count, g.hyperedge_count)

    def by_hyperedge(self) -> SegmentIndex:
        return SegmentIndex(self.token_ids, self.hyperedge_ids, self.hyperedge_count)

    def by_token(self) -> SegmentIndex:
        return SegmentIndex(self.hyperedge_ids, self.token_ids, self.token_count)


@dataclass
class ActivationTape:
    """Intermediates of one training-mode forward pass."""

    incidence: IncidenceArrays
    params: AdapterParameters
    h: Array
    o_prev: Array | None
    d: Array
    pre_relu: Array
    x: Array
    alpha_ne: Array
    p: Array
    p_prime: Array
    alpha_en: Array
    o: Array
    h_prime: Array


def _as_incidence(g: TokenizedHypergraph | IncidenceArrays) -> IncidenceArrays:
    if isinstance(g, IncidenceArrays):
        return g
    return IncidenceArrays.from_hypergraph(g)


def adapter_forward(
    h: Array,
    o_prev: Array | None,
    g: TokenizedHypergraph | IncidenceArrays,
    params: AdapterParameters,
    training: bool = False,
) -> tuple[Array, Array, ActivationTape | None]:
    """One adapter layer; returns ``(h', o, tape)`` (tape only when training)."""
    inc = _as_incidence(g)
    h = np.asarray(h, dtype=np.float64)
    n = h.shape[0]
    cd = params.w_down.shape[0]
    if n != inc.token_count:
        raise ValueError(f"hidden states carry {n} tokens but incidence expects {inc.token_count}")
    if h.shape[1] != params.w_down.shape[1]:
        raise ValueError("hidden width does not match W_down")
    if inc.token_ids.size and int(inc.token_ids.max()) >= n:
        raise ValueError("token id out of range")

    d = h @ params.w_down.T + params.b_down
    pre_relu = d if o_prev is None else d + o_prev
    x = np.maximum(pre_relu, 0.0)

    nnz = inc.token_ids.shape[0]
    scale = 1.0 / np.sqrt(cd)
    if nnz:
        type_of_pair = inc.type_of_hyperedge[inc.hyperedge_ids]
        x_of_pair = x[inc.token_ids]

        scores_ne = np.einsum("id,id->i", params.q[type_of_pair], x_of_pair) * scale
        by_he = inc.by_hyperedge()
        alpha_ne = segment_softmax(scores_ne, by_he)
        p = segment_weighted_sum(x, alpha_ne, by_he)

        p_prime = (
            np.einsum("edk,ek->ed", params.w_type[inc.type_of_hyperedge], p)
            + params.b_type[inc.type_of_hyperedge]
        )

        scores_en = np.einsum("id,id->i", x_of_pair, p_prime[inc.hyperedge_ids]) * scale
        by_token = inc.by_token()
        alpha_en = segment_softmax(scores_en, by_token)
        o = segment_weighted_sum(p_prime, alpha_en, by_token)
    else:
        alpha_ne = np.zeros(0)
        alpha_en = np.zeros(0)
        p = np.zeros((0, cd))
        p_prime = np.zeros((0, cd))
        o = np.zeros((n, cd))

    h_prime = x @ params.w_up.T + params.b_up + h

    tape = None
    if training:
        tape = ActivationTape(
            incidence=inc,
            params=params,
            h=h,
            o_prev=o_prev,
            d=d,
            pre_relu=pre_relu,
            x=x,
            alpha_ne=alpha_ne,
            p=p,
            p_prime=p_prime,
            alpha_en=alpha_en,
            o=o,
            h_prime=h_prime,
        )
    return h_prime, o, tape


def adapter_backward(
    tape: ActivationTape | None,
    grad_h_prime: Array,
    grad_o: Array,
) -> tuple[Array, Array | None, AdapterParameters]:
    """Reverse-mode through one adapter layer.

    Returns gradients w.r.t. the layer input ``h``, the previous layer's
    carry ``o_prev`` (``None`` at the first layer), and the parameters.
    """
    if tape is None:
        raise ValueError("adapter_backward needs the tape of a training-mode forward")
    inc = tape.incidence
    params = tape.params
    grads = params.zeros_like()
    scale = 1.0 / np.sqrt(params.w_down.shape[0])

    grad_h_prime = np.asarray(grad_h_prime, dtype=np.float64)
    grad_o = np.asarray(grad_o, dtype=np.float64)

    # h' = x W_up^T + b_up + h
    grad_x = grad_h_prime @ params.w_up
    grads.w_up += grad_h_prime.T @ tape.x
    grads.b_up += grad_h_prime.sum(axis=0)
    grad_h = grad_h_prime.copy()

    nnz = inc.token_ids.shape[0]
    if nnz:
        by_he = inc.by_hyperedge()
        by_token = inc.by_token()
        type_of_pair = inc.type_of_hyperedge[inc.hyperedge_ids]
        x_of_pair = tape.x[inc.token_ids]

        # o = sum alpha_en * p'
        grad_p_prime, grad_alpha_en = segment_weighted_sum_backward(
            grad_o, tape.p_prime, tape.alpha_en, by_token
        )
        grad_scores_en = segment_softmax_backward(grad_alpha_en, tape.alpha_en, by_token)

        # scores_en = x . p' / sqrt(cd) per pair
        np.add.at(
            grad_x,
            inc.token_ids,
            grad_scores_en[:, None] * tape.p_prime[inc.hyperedge_ids] * scale,
        )
        np.add.at(
            grad_p_prime,
            inc.hyperedge_ids,
            grad_scores_en[:, None] * x_of_pair * scale,
        )

        # p' = p W_type^T + b_type, per hyperedge type
        grad_p = np.einsum(
            "ed,edk->ek", grad_p_prime, params.w_type[inc.type_of_hyperedge]
        )
        np.add.at(
            grads.w_type,
            inc.type_of_hyperedge,
            np.einsum("ed,ek->edk", grad_p_prime, tape.p),
        )
        np.add.at(grads.b_type, inc.type_of_hyperedge, grad_p_prime)

        # p = sum alpha_ne * x
        grad_x_from_p, grad_alpha_ne = segment_weighted_sum_backward(
            grad_p, tape.x, tape.alpha_ne, by_he
        )
        grad_x += grad_x_from_p
        grad_scores_ne = segment_softmax_backward(grad_alpha_ne, tape.alpha_ne, by_he)

        # scores_ne = q_type . x / sqrt(cd) per pair
        np.add.at(
            grad_x,
            inc.token_ids,
            grad_scores_ne[:, None] * params.q[type_of_pair] * scale,
        )
        np.add.at(
            grads.q,
            type_of_pair,
            grad_scores_ne[:, None] * x_of_pair * scale,
        )

    # x = relu(d + o_prev)
    grad_pre = grad_x * (tape.pre_relu > 0.0)
    grad_o_prev = None if tape.o_prev is None else grad_pre

    # d = h W_down^T + b_down
    grad_h += grad_pre @ params.w_down
    grads.w_down += grad_pre.T @ tape.h
    grads.b_down += grad_pre.sum(axis=0)

    return grad_h, grad_o_prev, grads


ADAPTER_VARIANTS = ("plain_adapter", "hgadapter")


def count_parameters(cfg: PlmShapeConfig, variant: str = "hgadapter") -> int:
    """Exact trainable-parameter count across all layers.

    ``plain_adapter`` counts the bottleneck projections only; ``hgadapter``
    adds the per-type query vectors and transforms.
    """
    if variant not in ADAPTER_VARIANTS:
        raise ValueError(f"variant must be one of {ADAPTER_VARIANTS}")
    c, cd, t = cfg.hidden, cfg.bottleneck, cfg.type_count
    per_layer = c * cd + cd + cd * c + c
    if variant == "hgadapter":
        per_layer += t * (cd * cd + cd) + t * cd
    return cfg.layers * per_layer


def millions(count: int) -> float:
    """Round a parameter count to 0.1M, the precision used when quoting sizes."""
    return round(count / 1.0e6, 1)


@dataclass(frozen=True)
class ParameterAccounting:
    """Plain vs hypergraph adapter sizes for one host shape."""

    plain_count: int
    hyper_count: int
    plain_millions: float
    hyper_millions: float
    extra_vs_plain_pct: float
    pct_of_host: float | None


def parameter_accounting(
    cfg: PlmShapeConfig, host_params: int | None = None
) -> ParameterAccounting:
    """Size both adapter variants and derive the headline percentages.

    The extra-parameter percentage is computed from the 0.1M-rounded totals;
    the share-of-host percentage uses the exact hypergraph-variant count.
    """
    plain = count_parameters(cfg, "plain_adapter")
    hyper = count_parameters(cfg, "hgadapter")
    plain_m = millions(plain)
    hyper_m = millions(hyper)
    extra_pct = 100.0 * (hyper_m - plain_m) / plain_m if plain_m else float("nan")
    pct_of_host = None if host_params is None else 100.0 * hyper / host_params
    return ParameterAccounting(
        plain_count=plain,
        hyper_count=hyper,
        plain_millions=plain_m,
        hyper_millions=hyper_m,
        extra_vs_plain_pct=extra_pct,
        pct_of_host=pct_of_host,
    )


@dataclass(frozen=True)
class ReferenceHost:
    """A well-known host model shape used for the size comparisons."""

    name: str
    layers: int
    hidden: int
    total_params: int


REFERENCE_HOSTS: tuple[ReferenceHost, ...] = (
    ReferenceHost("roberta-base / codebert / graphcodebert", 12, 768, 125_000_000),
    ReferenceHost("unixcoder-base", 12, 768, 126_000_000),
    ReferenceHost("code-llama-7b", 32, 4096, 6_700_000_000),
    ReferenceHost("tinyllama-1.1b", 22, 2048, 1_100_000_000),
    ReferenceHost("qwen2.5-coder-0.5b", 24, 896, 500_000_000),
)


# --- checkpoints -------------------------------------------------------------


def _checkpoint_entries(layers: list[AdapterParameters]) -> dict[str, Array]:
    out: dict[str, Array] = {}
    for layer_no, params in enumerate(layers, start=1):
        prefix = f"layer{layer_no}"
        out[f"{prefix}.W_down"] = params.w_down
        out[f"{prefix}.b_down"] = params.b_down
        out[f"{prefix}.W_up"] = params.w_up
        out[f"{prefix}.b_up"] = params.b_up
        for t, kind in enumerate(TYPE_ORDER):
            out[f"{prefix}.q.{kind.value}"] = params.q[t]
            out[f"{prefix}.W_type.{kind.value}"] = params.w_type[t]
            out[f"{prefix}.b_type.{kind.value}"] = params.b_type[t]
    return out


def save_checkpoint(
    layers: list[AdapterParameters],
    path: str | Path,
    head: dict[str, Array] | None = None,
) -> None:
    """Write all tensors as a JSON map name -> {shape, row-major f64 data}."""
    entries = _checkpoint_entries(layers)
    if head:
        entries.update({f"head.{name}": value for name, value in head.items()})
    doc = {
        name: {"shape": list(value.shape), "data": np.asarray(value, dtype=np.float64).reshape(-1).tolist()}
        for name, value in entries.items()
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_checkpoint(path: str | Path) -> tuple[list[AdapterParameters], dict[str, Array]]:
    """Inverse of :func:`save_checkpoint`."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    tensors = {
        name: np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])
        for name, entry in doc.items()
    }
    head = {
        name.split(".", 1)[1]: value for name, value in tensors.items() if name.startswith("head.")
    }
    layer_numbers = sorted(
        {int(name.split(".")[0][len("layer"):]) for name in tensors if name.startswith("layer")}
    )
    layers = []
    for layer_no in layer_numbers:
        prefix = f"layer{layer_no}"
        layers.append(
            AdapterParameters(
                w_down=tensors[f"{prefix}.W_down"],
                b_down=tensors[f"{prefix}.b_down"],
                w_up=tensors[f"{prefix}.W_up"],
                b_up=tensors[f"{prefix}.b_up"],
                q=np.stack([tensors[f"{prefix}.q.{k.value}"] for k in TYPE_ORDER]),
                w_type=np.stack([tensors[f"{prefix}.W_type.{k.value}"] for k in TYPE_ORDER]),
                b_type=np.stack([tensors[f"{prefix}.b_type.{k.value}"] for k in TYPE_ORDER]),
            )
        )
    return layers, head
