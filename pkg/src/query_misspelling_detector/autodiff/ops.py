"""Differentiable operators.

Each function computes its forward value with numpy and returns a Tensor
carrying the rule for its local gradient. Binary operators broadcast like
numpy; gradients are summed back to each operand's shape.
"""

import math
from typing import Optional, Sequence

import numpy as np

from ..utils.errors import ShapeError, UndefinedLossError, ValidationError
from .tensor import Tensor, as_tensor


IGNORE_ID = -100
LAYER_NORM_EPS = 1e-5

_GELU_C = math.sqrt(2.0 / math.pi)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """ブロードキャストで広がった軸を合計して元の形状に戻す。"""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _broadcast_shape(a: Tensor, b: Tensor, op: str) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(
            f"{op}: 形状がブロードキャストできません: {a.shape} と {b.shape}",
            {"op": op, "left": list(a.shape), "right": list(b.shape)}
        )


# -- elementwise arithmetic ---------------------------------------------------------


def add(a: Tensor | float | np.ndarray, b: Tensor | float | np.ndarray) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "add")
    return Tensor.from_op(
        a.data + b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
        "add",
    )


def sub(a: Tensor | float | np.ndarray, b: Tensor | float | np.ndarray) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "sub")
    return Tensor.from_op(
        a.data - b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)),
        "sub",
    )


def mul(a: Tensor | float | np.ndarray, b: Tensor | float | np.ndarray) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "mul")
    return Tensor.from_op(
        a.data * b.data,
        (a, b),
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
        "mul",
    )


def div(a: Tensor | float | np.ndarray, b: Tensor | float | np.ndarray) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "div")
    return Tensor.from_op(
        a.data / b.data,
        (a, b),
        lambda g: (
            _unbroadcast(g / b.data, a.shape),
            _unbroadcast(-g * a.data / (b.data * b.data), b.shape),
        ),
        "div",
    )


def neg(a: Tensor) -> Tensor:
    return Tensor.from_op(-a.data, (a,), lambda g: (-g,), "neg")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """最後の2軸で行列積をとる（先頭の軸はブロードキャスト）。"""
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeError(
            f"matmul: 形状が一致しません: {a.shape} と {b.shape}",
            {"op": "matmul", "left": list(a.shape), "right": list(b.shape)}
        )
    try:
        out = np.matmul(a.data, b.data)
    except ValueError:
        raise ShapeError(
            f"matmul: 先頭の軸がブロードキャストできません: {a.shape} と {b.shape}",
            {"op": "matmul", "left": list(a.shape), "right": list(b.shape)}
        )

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
        gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

    return Tensor.from_op(out, (a, b), rule, "matmul")


# -- activations ------------------------------------------------------------------


def sigmoid(x: Tensor) -> Tensor:
    y = np.empty_like(x.data)
    positive = x.data >= 0
    y[positive] = 1.0 / (1.0 + np.exp(-x.data[positive]))
    ez = np.exp(x.data[~positive])
    y[~positive] = ez / (1.0 + ez)
    return Tensor.from_op(y, (x,), lambda g: (g * y * (1.0 - y),), "sigmoid")


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)
    return Tensor.from_op(y, (x,), lambda g: (g * (1.0 - y * y),), "tanh")


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return Tensor.from_op(x.data * mask, (x,), lambda g: (g * mask,), "relu")


def gelu(x: Tensor) -> Tensor:
    """tanh近似のGELU。"""
    v = x.data
    inner = _GELU_C * (v + 0.044715 * v ** 3)
    t = np.tanh(inner)
    y = 0.5 * v * (1.0 + t)

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        d_inner = _GELU_C * (1.0 + 3 * 0.044715 * v ** 2)
        return (g * (0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * d_inner),)

    return Tensor.from_op(y, (x,), rule, "gelu")


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axis, keepdims=True)

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        return (y * (g - (g * y).sum(axis=axis, keepdims=True)),)

    return Tensor.from_op(y, (x,), rule, "softmax")


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = LAYER_NORM_EPS) -> Tensor:
    """最後の軸で正規化し、gain・biasを適用する。"""
    d = x.shape[-1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise ShapeError(
            f"layer_norm: gain/biasの形状が入力と一致しません: {x.shape}, {gain.shape}, {bias.shape}",
            {"input": list(x.shape), "gain": list(gain.shape), "bias": list(bias.shape)}
        )
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    inv_std = 1.0 / np.sqrt((centered * centered).mean(axis=-1, keepdims=True) + eps)
    xhat = centered * inv_std
    y = xhat * gain.data + bias.data
    lead = tuple(range(x.ndim - 1))

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        dxhat = g * gain.data
        dx = inv_std * (
            dxhat
            - dxhat.mean(axis=-1, keepdims=True)
            - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
        )
        return dx, (g * xhat).sum(axis=lead), g.sum(axis=lead)

    return Tensor.from_op(y, (x, gain, bias), rule, "layer_norm")


# -- indexing and shape -------------------------------------------------------------


def embedding(weight: Tensor, ids: np.ndarray) -> Tensor:
    """ids（整数配列）に対応する行を取り出す。"""
    ids = np.asarray(ids)
    if ids.size and (ids.min() < 0 or ids.max() >= weight.shape[0]):
        raise ValidationError(
            f"埋め込みのidが範囲外です: [{ids.min()}, {ids.max()}] (語彙サイズ {weight.shape[0]})",
            {"min_id": int(ids.min()), "max_id": int(ids.max()), "vocab_size": weight.shape[0]}
        )

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        grad = np.zeros_like(weight.data)
        np.add.at(grad, ids, g)
        return (grad,)

    return Tensor.from_op(weight.data[ids], (weight,), rule, "embedding")


def getitem(x: Tensor, index) -> Tensor:
    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        grad = np.zeros_like(x.data)
        np.add.at(grad, index, g)
        return (grad,)

    return Tensor.from_op(x.data[index], (x,), rule, "getitem")


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    try:
        y = x.data.reshape(shape)
    except ValueError:
        raise ShapeError(
            f"reshape: {x.shape} を {tuple(shape)} に変形できません",
            {"from": list(x.shape), "to": list(shape)}
        )
    return Tensor.from_op(y, (x,), lambda g: (g.reshape(x.shape),), "reshape")


def transpose(x: Tensor, axes: Optional[Sequence[int]] = None) -> Tensor:
    axes = tuple(axes) if axes is not None else tuple(reversed(range(x.ndim)))
    inverse = tuple(np.argsort(axes))
    return Tensor.from_op(
        np.transpose(x.data, axes), (x,), lambda g: (np.transpose(g, inverse),), "transpose"
    )


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    try:
        y = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        raise ShapeError(
            f"concat: 形状が一致しません: {[t.shape for t in tensors]}",
            {"shapes": [list(t.shape) for t in tensors], "axis": axis}
        )
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]
    return Tensor.from_op(
        y, tuple(tensors), lambda g: tuple(np.split(g, bounds, axis=axis)), "concat"
    )


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    shapes = {t.shape for t in tensors}
    if len(shapes) != 1:
        raise ShapeError(
            f"stack: 形状が一致しません: {[t.shape for t in tensors]}",
            {"shapes": [list(t.shape) for t in tensors]}
        )
    y = np.stack([t.data for t in tensors], axis=axis)
    return Tensor.from_op(
        y,
        tuple(tensors),
        lambda g: tuple(np.take(g, i, axis=axis) for i in range(len(tensors))),
        "stack",
    )


# -- reductions ---------------------------------------------------------------------


def sum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:  # noqa: A001
    y = x.data.sum(axis=axis, keepdims=keepdims)

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return Tensor.from_op(y, (x,), rule, "sum")


def mean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    n = x.size if axis is None else int(np.prod([x.shape[a] for a in np.atleast_1d(axis)]))
    return sum(x, axis=axis, keepdims=keepdims) * (1.0 / n)


# -- regularization -----------------------------------------------------------------


def dropout_mask(shape: tuple[int, ...], p: float, seed: int, layer_id: int, step: int) -> np.ndarray:
    """
    (seed, layer_id, step) をキーとするカウンタベース乱数でマスクを作る。

    同じキーからは常に同じマスクが得られる。
    """
    bit_gen = np.random.Philox(key=[seed, layer_id], counter=[step, 0, 0, 0])
    keep = np.random.Generator(bit_gen).random(shape) >= p
    return keep.astype(np.float64) / (1.0 - p)


def dropout(
    x: Tensor,
    p: float,
    train: bool,
    seed: int = 0,
    layer_id: int = 0,
    step: int = 0,
) -> Tensor:
    """学習時は確率pで0にし、残りを1/(1-p)倍する。学習時以外は恒等写像。"""
    if not 0.0 <= p < 1.0:
        raise ValidationError(f"dropoutの確率は[0, 1)の範囲である必要があります: {p}", {"p": p})
    if not train or p == 0.0:
        return x
    mask = dropout_mask(x.shape, p, seed, layer_id, step)
    return Tensor.from_op(x.data * mask, (x,), lambda g: (g * mask,), "dropout")


# -- losses -------------------------------------------------------------------------


def cross_entropy(logits: Tensor, targets: np.ndarray, ignore_id: Optional[int] = IGNORE_ID) -> Tensor:
    """
    ignore_id以外の位置の負の対数ソフトマックスの平均。

    Args:
        logits: (..., クラス数) のロジット
        targets: logitsの最後の軸を除いた形状の整数配列
        ignore_id: 無視する位置のターゲット値

    Raises:
        ShapeError: logitsとtargetsの形状が一致しない場合
        ValidationError: ターゲットが範囲外の場合
        UndefinedLossError: すべての位置が無視された場合
    """
    targets = np.asarray(targets)
    if logits.ndim < 2 or logits.shape[:-1] != targets.shape:
        raise ShapeError(
            f"cross_entropy: 形状が一致しません: logits {logits.shape}, targets {targets.shape}",
            {"logits": list(logits.shape), "targets": list(targets.shape)}
        )
    n_classes = logits.shape[-1]
    flat_logits = logits.data.reshape(-1, n_classes)
    flat_targets = targets.reshape(-1)
    valid = flat_targets != ignore_id if ignore_id is not None else np.ones_like(flat_targets, dtype=bool)
    n_valid = int(valid.sum())
    if n_valid == 0:
        raise UndefinedLossError("すべての位置が無視されたため損失が定義できません")
    chosen = flat_targets[valid]
    if chosen.min() < 0 or chosen.max() >= n_classes:
        raise ValidationError(
            f"ターゲットが範囲外です: [{chosen.min()}, {chosen.max()}] (クラス数 {n_classes})",
            {"n_classes": n_classes}
        )

    rows = flat_logits[valid]
    shifted = rows - rows.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    log_probs = shifted[np.arange(n_valid), chosen] - log_z
    loss = -log_probs.mean()

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        probs = np.exp(shifted - log_z[:, None])
        probs[np.arange(n_valid), chosen] -= 1.0
        grad = np.zeros_like(flat_logits)
        grad[valid] = probs * (g / n_valid)
        return (grad.reshape(logits.shape),)

    return Tensor.from_op(np.array(loss), (logits,), rule, "cross_entropy")
