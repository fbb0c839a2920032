"""Parameter containers, initializers and the basic layers shared by all models."""

from typing import Iterator, Optional

import numpy as np

from ..autodiff import ops
from ..autodiff.tensor import Tensor
from ..utils.errors import CheckpointError


EMBEDDING_INIT_RANGE = 0.05


def uniform(rng: np.random.Generator, shape: tuple[int, ...], limit: float = EMBEDDING_INIT_RANGE) -> np.ndarray:
    return rng.uniform(-limit, limit, size=shape)


def xavier_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class Module:
    """名前付きパラメータとサブモジュールを持つ基底クラス。"""

    def __init__(self) -> None:
        self._params: dict[str, Tensor] = {}
        self._modules: dict[str, "Module"] = {}
        self.training = False

    def add_param(self, name: str, data: np.ndarray) -> Tensor:
        param = Tensor(data, requires_grad=True, name=name)
        self._params[name] = param
        return param

    def add_module(self, name: str, module: "Module") -> "Module":
        self._modules[name] = module
        return module

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Tensor]]:
        for name, param in self._params.items():
            yield prefix + name, param
        for name, module in self._modules.items():
            yield from module.named_parameters(prefix + name + ".")

    def parameters(self) -> dict[str, Tensor]:
        return dict(self.named_parameters())

    def trainable_parameters(self) -> dict[str, Tensor]:
        """オプティマイザに渡すパラメータ（凍結したものを除く）。"""
        return self.parameters()

    def train(self, mode: bool = True) -> "Module":
        self.training = mode
        for module in self._modules.values():
            module.train(mode)
        return self

    def eval(self) -> "Module":
        return self.train(False)

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: param.data.copy() for name, param in self.named_parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray], prefix: Optional[str] = None) -> None:
        """
        パラメータを読み込む。prefixを指定した場合はその配下だけを対象にする。

        Raises:
            CheckpointError: パラメータの欠落または形状の不一致がある場合
        """
        params = self.parameters()
        targets = {name: p for name, p in params.items() if prefix is None or name.startswith(prefix)}
        missing = sorted(set(targets) - set(state))
        if missing:
            raise CheckpointError(
                f"チェックポイントにパラメータがありません: {missing[:5]}",
                {"missing": missing}
            )
        for name, param in targets.items():
            value = state[name]
            if value.shape != param.data.shape:
                raise CheckpointError(
                    f"パラメータの形状が一致しません: {name} {value.shape} vs {param.data.shape}",
                    {"parameter": name, "checkpoint_shape": list(value.shape), "model_shape": list(param.data.shape)}
                )
            param.data = np.array(value, dtype=np.float64)
            param.grad = None


class Linear(Module):
    """y = x W + b（Xavier初期化、バイアスは0）。"""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        super().__init__()
        self.weight = self.add_param("weight", xavier_uniform(rng, in_dim, out_dim))
        self.bias = self.add_param("bias", np.zeros(out_dim))

    def __call__(self, x: Tensor) -> Tensor:
        return x @ self.weight + self.bias


class Embedding(Module):
    def __init__(self, n_rows: int, dim: int, rng: np.random.Generator):
        super().__init__()
        self.weight = self.add_param("weight", uniform(rng, (n_rows, dim)))

    def __call__(self, ids: np.ndarray) -> Tensor:
        return ops.embedding(self.weight, ids)


class LayerNorm(Module):
    def __init__(self, dim: int):
        super().__init__()
        self.gain = self.add_param("gain", np.ones(dim))
        self.bias = self.add_param("bias", np.zeros(dim))

    def __call__(self, x: Tensor) -> Tensor:
        return ops.layer_norm(x, self.gain, self.bias)
