"""Central finite-difference verification of recorded gradients."""

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from .tensor import Tensor, backward, no_grad


@dataclass
class GradCheckResult:
    """パラメータ名ごとの最大相対誤差。"""

    max_rel_error: dict[str, float] = field(default_factory=dict)

    @property
    def worst(self) -> float:
        return max(self.max_rel_error.values(), default=0.0)

    def passed(self, tol: float = 1e-4) -> bool:
        return self.worst < tol


def relative_error(analytic: float, numeric: float, floor: float = 1e-6) -> float:
    """|a - n| / max(|a| + |n|, floor)。両方がほぼ0の場合は絶対誤差に近づく。"""
    return abs(analytic - numeric) / max(abs(analytic) + abs(numeric), floor)


def check_gradients(
    loss_fn: Callable[[], Tensor],
    params: Mapping[str, Tensor],
    h: float = 1e-5,
    probes: Optional[int] = None,
    seed: int = 0,
) -> GradCheckResult:
    """
    解析的勾配と中心差分 (f(x+h) - f(x-h)) / 2h を比較する。

    Args:
        loss_fn: パラメータから決定的にスカラー損失を計算する関数
        params: 検査するパラメータ
        h: 差分の刻み幅
        probes: パラメータごとに調べる要素数（Noneの場合は全要素）
        seed: 調べる要素を選ぶ乱数シード
    """
    for param in params.values():
        param.grad = None
    backward(loss_fn(), params.values())

    rng = np.random.default_rng(seed)
    result = GradCheckResult()
    for name, param in params.items():
        analytic = param.grad.copy()
        flat = param.data.reshape(-1)
        n = flat.size
        indices = np.arange(n) if probes is None or probes >= n else rng.choice(n, size=probes, replace=False)
        worst = 0.0
        for index in indices:
            original = flat[index]
            with no_grad():
                flat[index] = original + h
                plus = loss_fn().item()
                flat[index] = original - h
                minus = loss_fn().item()
            flat[index] = original
            numeric = (plus - minus) / (2.0 * h)
            worst = max(worst, relative_error(float(analytic.reshape(-1)[index]), numeric))
        result.max_rel_error[name] = worst
    return result
