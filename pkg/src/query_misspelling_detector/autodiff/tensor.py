"""Reverse-mode automatic differentiation over dense float64 arrays.

A Tensor records the tensors it was computed from and a rule mapping the
upstream gradient to one gradient per input. `backward` walks the record in
reverse topological order. Gradients of intermediate nodes live only for the
duration of one call; leaves accumulate into `.grad`, so two calls without a
reset add up.
"""

import contextlib
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np

from ..utils.errors import ShapeError, ValidationError


GradRule = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_grad_enabled = True


@contextlib.contextmanager
def no_grad() -> Iterator[None]:
    """計算グラフを記録しないコンテキスト（推論・評価用）。"""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


def is_grad_enabled() -> bool:
    return _grad_enabled


class Tensor:
    """勾配を持てる多次元配列（常にfloat64、行優先）。"""

    def __init__(
        self,
        data: np.ndarray | float | Sequence,
        requires_grad: bool = False,
        name: Optional[str] = None,
    ):
        self.data = np.array(data, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self.name = name
        self._parents: tuple["Tensor", ...] = ()
        self._rule: Optional[GradRule] = None
        self.op = "leaf"

    @classmethod
    def from_op(
        cls,
        data: np.ndarray,
        parents: Sequence["Tensor"],
        rule: GradRule,
        op: str,
    ) -> "Tensor":
        """演算結果を作る。入力のいずれかが勾配を必要とする場合だけ記録する。"""
        out = cls.__new__(cls)
        out.data = np.asarray(data, dtype=np.float64)
        out.grad = None
        out.name = None
        out.op = op
        needs = _grad_enabled and any(p.requires_grad for p in parents)
        out.requires_grad = needs
        out._parents = tuple(parents) if needs else ()
        out._rule = rule if needs else None
        return out

    # -- basic properties ---------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def is_leaf(self) -> bool:
        return self._rule is None

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, op={self.op!r}{label})"

    def __len__(self) -> int:
        return len(self.data)

    # -- operators (implemented in ops) -------------------------------------------

    def __add__(self, other: "Tensor | float | np.ndarray") -> "Tensor":
        from . import ops
        return ops.add(self, other)

    __radd__ = __add__

    def __sub__(self, other: "Tensor | float | np.ndarray") -> "Tensor":
        from . import ops
        return ops.sub(self, other)

    def __rsub__(self, other: "Tensor | float | np.ndarray") -> "Tensor":
        from . import ops
        return ops.sub(other, self)

    def __mul__(self, other: "Tensor | float | np.ndarray") -> "Tensor":
        from . import ops
        return ops.mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other: "Tensor | float | np.ndarray") -> "Tensor":
        from . import ops
        return ops.div(self, other)

    def __neg__(self) -> "Tensor":
        from . import ops
        return ops.neg(self)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        from . import ops
        return ops.matmul(self, other)

    def __getitem__(self, index) -> "Tensor":
        from . import ops
        return ops.getitem(self, index)

    def reshape(self, *shape: int) -> "Tensor":
        from . import ops
        return ops.reshape(self, shape[0] if len(shape) == 1 and isinstance(shape[0], tuple) else shape)

    def transpose(self, *axes: int) -> "Tensor":
        from . import ops
        return ops.transpose(self, axes or None)

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        from . import ops
        return ops.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        from . import ops
        return ops.mean(self, axis=axis, keepdims=keepdims)

    # -- backprop -----------------------------------------------------------------

    def backward(self) -> None:
        backward(self)


def as_tensor(value: "Tensor | float | np.ndarray") -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _topological_order(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in visited:
                stack.append((parent, False))
    return order


def backward(loss: Tensor, params: Optional[Iterable[Tensor]] = None) -> None:
    """
    スカラー損失から勾配を逆伝播する。

    到達可能な葉テンソル（requires_grad=True）の `.grad` に加算する。
    paramsを指定した場合、到達できなかったパラメータの勾配は0になる。

    Raises:
        ValidationError: 損失がスカラーでない場合
    """
    if loss.data.shape != ():
        raise ValidationError(
            f"backwardにはスカラーの損失が必要です: shape={loss.shape}",
            {"shape": list(loss.shape)}
        )

    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(_topological_order(loss)):
        grad = grads.pop(id(node), None)
        if grad is None:
            continue
        if node._rule is None:
            if node.requires_grad:
                node.grad = grad.copy() if node.grad is None else node.grad + grad
            continue
        for parent, parent_grad in zip(node._parents, node._rule(grad)):
            if parent_grad is None or not parent.requires_grad:
                continue
            if parent_grad.shape != parent.data.shape:
                raise ShapeError(
                    f"勾配の形状が一致しません: {parent_grad.shape} vs {parent.data.shape} ({node.op})",
                    {"grad_shape": list(parent_grad.shape), "shape": list(parent.data.shape), "op": node.op}
                )
            key = id(parent)
            grads[key] = grads[key] + parent_grad if key in grads else parent_grad

    if params is not None:
        for param in params:
            if param.grad is None:
                param.zero_grad()
