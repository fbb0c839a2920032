"""Adamのユニットテスト"""

import numpy as np
import pytest

from query_misspelling_detector.autodiff import Adam, AdamState, Tensor, adam_step
from query_misspelling_detector.utils.errors import ValidationError


class TestAdam:
    """Adamの更新"""

    def test_first_step_moves_by_lr(self):
        x = Tensor([1.0, -1.0], requires_grad=True)
        x.grad = np.array([0.5, -2.0])
        adam_step({"x": x}, AdamState(lr=0.01))
        np.testing.assert_allclose(x.data, [0.99, -0.99], atol=1e-6)

    def test_zero_gradient_still_advances_state(self):
        x = Tensor([1.0], requires_grad=True)
        x.zero_grad()
        state = AdamState(lr=0.1)
        adam_step({"x": x}, state)
        assert state.t == 1
        np.testing.assert_allclose(x.data, [1.0])

    def test_missing_gradient(self):
        with pytest.raises(ValidationError):
            adam_step({"x": Tensor([1.0], requires_grad=True)}, AdamState(lr=0.1))

    def test_non_positive_lr(self):
        with pytest.raises(ValidationError):
            AdamState(lr=0.0)

    def test_quadratic_bowl(self):
        x = Tensor([5.0, -4.0], requires_grad=True)
        optimizer = Adam({"x": x}, lr=0.1)
        for _ in range(1000):
            optimizer.zero_grad()
            ((x - 3.0) * (x - 3.0)).sum().backward()
            optimizer.step()
        np.testing.assert_allclose(x.data, [3.0, 3.0], atol=0.05)
