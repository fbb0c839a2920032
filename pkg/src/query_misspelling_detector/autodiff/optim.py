"""Adam with bias correction over named parameters."""

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..utils.errors import ValidationError
from .tensor import Tensor


@dataclass
class AdamState:
    """Adamの状態（モーメントはパラメータ名をキーに持つ）。"""

    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.lr <= 0:
            raise ValidationError(f"学習率は正である必要があります: {self.lr}", {"lr": self.lr})


def adam_step(params: Mapping[str, Tensor], state: AdamState) -> None:
    """
    1ステップ更新する。勾配0のパラメータも状態は進み、tは常に1増える。

    Raises:
        ValidationError: 勾配が設定されていないパラメータがある場合
    """
    missing = sorted(name for name, p in params.items() if p.grad is None)
    if missing:
        raise ValidationError(
            f"勾配が設定されていないパラメータがあります: {missing[:5]}",
            {"missing": missing}
        )

    state.t += 1
    b1, b2 = state.beta1, state.beta2
    correction1 = 1.0 - b1 ** state.t
    correction2 = 1.0 - b2 ** state.t
    for name, param in params.items():
        grad = param.grad
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros_like(param.data)
            v = np.zeros_like(param.data)
        m = b1 * m + (1.0 - b1) * grad
        v = b2 * v + (1.0 - b2) * grad * grad
        state.m[name] = m
        state.v[name] = v
        m_hat = m / correction1
        v_hat = v / correction2
        param.data = param.data - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


class Adam:
    """パラメータ集合とAdamStateをまとめたオプティマイザ。"""

    def __init__(self, params: Mapping[str, Tensor], lr: float, **kwargs: float):
        self.params = dict(params)
        self.state = AdamState(lr=lr, **kwargs)

    def zero_grad(self) -> None:
        for param in self.params.values():
            param.grad = None

    def step(self) -> None:
        adam_step(self.params, self.state)
