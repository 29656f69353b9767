"""Dense f64 kernels with analytic backward passes, plus a gradient checker.

Forward/backward pairs are handwritten per operation; there is no general
autodiff graph. The segment operations work over a COO-style
:class:`SegmentIndex` that mirrors incidence pairs: each pair carries one
score/weight, ``element_ids`` index rows of a value matrix, and
``group_ids`` select the reduction group.

All reductions run in a fixed sequential order, so results are deterministic
for fixed inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

Array = np.ndarray


def _f64(x: Array) -> Array:
    return np.ascontiguousarray(x, dtype=np.float64)


@dataclass(frozen=True)
class SegmentIndex:
    """COO grouping: pair ``i`` maps element ``element_ids[i]`` to group ``group_ids[i]``.

    ``group_count`` may exceed the number of populated groups; empty groups
    reduce to zero rows in :func:`segment_weighted_sum` (the convention the
    adapter relies on for tokens outside every hyperedge).
    """

    element_ids: Array
    group_ids: Array
    group_count: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "element_ids", np.asarray(self.element_ids, dtype=np.int64))
        object.__setattr__(self, "group_ids", np.asarray(self.group_ids, dtype=np.int64))
        if self.element_ids.shape != self.group_ids.shape or self.element_ids.ndim != 1:
            raise ValueError("element_ids and group_ids must be equal-length vectors")
        if self.size and (self.group_ids.min() < 0 or self.group_ids.max() >= self.group_count):
            raise ValueError("group id out of range")
        if self.size and self.element_ids.min() < 0:
            raise ValueError("element ids must be nonnegative")

    @property
    def size(self) -> int:
        return int(self.element_ids.shape[0])

    @classmethod
    def from_pairs(
        cls, pairs: Sequence[tuple[int, int]], group_count: int | None = None
    ) -> "SegmentIndex":
        elements = np.fromiter((p[0] for p in pairs), dtype=np.int64, count=len(pairs))
        groups = np.fromiter((p[1] for p in pairs), dtype=np.int64, count=len(pairs))
        if group_count is None:
            group_count = int(groups.max()) + 1 if len(pairs) else 0
        return cls(elements, groups, group_count)


def segment_softmax(scores: Array, seg: SegmentIndex) -> Array:
    """Exp-normalize ``scores`` within each group, with max-subtraction."""
    scores = _f64(scores)
    if scores.shape != seg.element_ids.shape:
        raise ValueError("scores must carry one entry per index pair")
    if seg.size == 0:
        return np.zeros(0, dtype=np.float64)
    group_max = np.full(seg.group_count, -np.inf)
    np.maximum.at(group_max, seg.group_ids, scores)
    shifted = np.exp(scores - group_max[seg.group_ids])
    denom = np.zeros(seg.group_count, dtype=np.float64)
    np.add.at(denom, seg.group_ids, shifted)
    return shifted / denom[seg.group_ids]


def segment_softmax_backward(grad_weights: Array, weights: Array, seg: SegmentIndex) -> Array:
    """Gradient of segment_softmax w.r.t. the raw scores."""
    grad_weights = _f64(grad_weights)
    weights = _f64(weights)
    inner = np.zeros(seg.group_count, dtype=np.float64)
    np.add.at(inner, seg.group_ids, weights * grad_weights)
    return weights * (grad_weights - inner[seg.group_ids])


def segment_weighted_sum(values: Array, weights: Array, seg: SegmentIndex) -> Array:
    """Per-group row ``sum_i weights[i] * values[element_ids[i]]``."""
    values = _f64(values)
    weights = _f64(weights)
    if weights.shape != seg.element_ids.shape:
        raise ValueError("weights must carry one entry per index pair")
    if values.ndim != 2:
        raise ValueError("values must be a matrix")
    out = np.zeros((seg.group_count, values.shape[1]), dtype=np.float64)
    if seg.size:
        np.add.at(out, seg.group_ids, weights[:, None] * values[seg.element_ids])
    return out


def segment_weighted_sum_backward(
    grad_out: Array, values: Array, weights: Array, seg: SegmentIndex
) -> tuple[Array, Array]:
    """Gradients of segment_weighted_sum w.r.t. ``values`` and ``weights``."""
    grad_out = _f64(grad_out)
    grad_values = np.zeros_like(values, dtype=np.float64)
    if seg.size == 0:
        return grad_values, np.zeros(0, dtype=np.float64)
    per_pair = grad_out[seg.group_ids]
    np.add.at(grad_values, seg.element_ids, weights[:, None] * per_pair)
    grad_weights = np.einsum("id,id->i", values[seg.element_ids], per_pair)
    return grad_values, grad_weights


# --- standard dense ops -----------------------------------------------------


def matmul(a: Array, b: Array) -> Array:
    return a @ b


def matmul_backward(grad: Array, a: Array, b: Array) -> tuple[Array, Array]:
    return grad @ b.T, a.T @ grad


def add(a: Array, b: Array) -> Array:
    return a + b


def add_backward(grad: Array) -> tuple[Array, Array]:
    return grad, grad


def bias_add(x: Array, b: Array) -> Array:
    return x + b


def bias_add_backward(grad: Array) -> tuple[Array, Array]:
    return grad, grad.sum(axis=0)


def relu(x: Array) -> Array:
    return np.maximum(x, 0.0)


def relu_backward(grad: Array, x: Array) -> Array:
    # Subgradient 0 at exactly 0.
    return grad * (x > 0.0)


def softmax(x: Array, axis: int = -1) -> Array:
    shifted = x - x.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def softmax_backward(grad: Array, y: Array, axis: int = -1) -> Array:
    inner = (grad * y).sum(axis=axis, keepdims=True)
    return y * (grad - inner)


def concat(parts: Sequence[Array], axis: int = -1) -> Array:
    return np.concatenate(parts, axis=axis)


def concat_backward(grad: Array, sizes: Sequence[int], axis: int = -1) -> list[Array]:
    split_points = np.cumsum(sizes)[:-1]
    return np.split(grad, split_points, axis=axis)


def layer_norm(
    x: Array, gamma: Array, beta: Array, eps: float = 1e-5
) -> tuple[Array, tuple[Array, Array, Array, Array]]:
    """Row-wise layer norm; returns output and the cache for the backward."""
    mean = x.mean(axis=-1, keepdims=True)
    centered = x - mean
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    normed = centered * inv_std
    return normed * gamma + beta, (normed, inv_std, gamma, centered)


def layer_norm_backward(
    grad: Array, cache: tuple[Array, Array, Array, Array]
) -> tuple[Array, Array, Array]:
    normed, inv_std, gamma, _centered = cache
    grad_normed = grad * gamma
    grad_gamma = (grad * normed).sum(axis=0)
    grad_beta = grad.sum(axis=0)
    mean_g = grad_normed.mean(axis=-1, keepdims=True)
    mean_gn = (grad_normed * normed).mean(axis=-1, keepdims=True)
    grad_x = inv_std * (grad_normed - mean_g - normed * mean_gn)
    return grad_x, grad_gamma, grad_beta


def cross_entropy_with_logits(logits: Array, labels: Array) -> tuple[float, Array]:
    """Mean negative log-likelihood; returns the loss and the probabilities."""
    probs = softmax(logits, axis=-1)
    n = logits.shape[0]
    picked = probs[np.arange(n), labels]
    loss = float(-np.log(np.clip(picked, 1e-300, None)).mean())
    return loss, probs


def cross_entropy_backward(probs: Array, labels: Array) -> Array:
    n = probs.shape[0]
    grad = probs.copy()
    grad[np.arange(n), labels] -= 1.0
    return grad / n


# --- finite-difference gradient checking ------------------------------------


@dataclass(frozen=True)
class GradCheckReport:
    """Worst-coordinate comparison between analytic and numeric gradients."""

    max_rel_err: float
    passed: bool
    worst_param: str
    worst_index: tuple[int, ...]
    coords_checked: int
    coords_skipped: int
    skipped: tuple[tuple[str, tuple[int, ...]], ...] = field(default_factory=tuple)


def grad_check(
    f: Callable[[Mapping[str, Array]], tuple[float, Mapping[str, Array]]],
    params: Mapping[str, Array],
    eps: float = 1e-6,
    tol: float = 1e-5,
    skip: Mapping[str, Array] | None = None,
) -> GradCheckReport:
    """Compare the analytic gradient of ``f`` against central differences.

    ``f`` evaluates a scalar loss at the given parameters and also returns
    its analytic gradients. Relative error per coordinate is
    ``|ga - gn| / max(1e-8, |ga| + |gn|)``; the check passes when the worst
    coordinate is within ``tol``. Coordinates flagged in ``skip`` masks
    (e.g. inputs sitting exactly on a relu kink) are recorded but not
    compared.
    """
    params = {k: _f64(v) for k, v in params.items()}
    _, analytic = f(params)

    max_rel = 0.0
    worst = ("", ())
    checked = 0
    skipped: list[tuple[str, tuple[int, ...]]] = []
    for name in sorted(params):
        value = params[name]
        grad = np.asarray(analytic[name], dtype=np.float64)
        if grad.shape != value.shape:
            raise ValueError(f"analytic gradient shape mismatch for {name!r}")
        mask = None if skip is None else skip.get(name)
        flat = value.reshape(-1)
        for i in range(flat.size):
            idx = np.unravel_index(i, value.shape)
            if mask is not None and bool(np.asarray(mask)[idx]):
                skipped.append((name, tuple(int(j) for j in idx)))
                continue
            orig = flat[i]
            flat[i] = orig + eps
            up, _ = f(params)
            flat[i] = orig - eps
            down, _ = f(params)
            flat[i] = orig
            if not (np.isfinite(up) and np.isfinite(down)):
                raise FloatingPointError(
                    f"non-finite loss while perturbing {name}{tuple(int(j) for j in idx)}"
                )
            numeric = (up - down) / (2.0 * eps)
            ga = float(grad[idx])
            rel = abs(ga - numeric) / max(1e-8, abs(ga) + abs(numeric))
            checked += 1
            if rel > max_rel:
                max_rel = rel
                worst = (name, tuple(int(j) for j in idx))
    return GradCheckReport(
        max_rel_err=max_rel,
        passed=max_rel <= tol,
        worst_param=worst[0],
        worst_index=worst[1],
        coords_checked=checked,
        coords_skipped=len(skipped),
        skipped=tuple(skipped),
    )
