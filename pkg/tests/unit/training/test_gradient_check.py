"""有限差分梯度檢查測試"""

import pytest
import torch

from src.main.python.classifier.model import build_model
from src.main.python.core.exceptions import ParameterError
from src.main.python.data.images import zero_image
from src.main.python.training.gradient_check import check_gradients, gradient_check
from tests.helpers import make_config


def test_quadratic_has_exact_gradient():
    param = torch.nn.Parameter(torch.tensor([0.5, -2.0, 3.0], dtype=torch.float64))
    report = check_gradients([("p", param)], lambda: (param ** 2).sum(), epsilon=1e-5)
    assert report.max_relative_error <= 1e-8
    assert report.entries_checked == 3
    assert param.grad is None


def test_epsilon_and_precision_guards():
    param = torch.nn.Parameter(torch.ones(2, dtype=torch.float64))
    with pytest.raises(ParameterError):
        check_gradients([("p", param)], lambda: param.sum(), epsilon=1e-2)
    single = torch.nn.Parameter(torch.ones(2, dtype=torch.float32))
    with pytest.raises(ParameterError):
        check_gradients([("p", single)], lambda: single.sum(), epsilon=1e-5)


@pytest.fixture(scope="module")
def tiny_model():
    config = make_config(
        data={"resolution": 2},
        encoder={"text_dim": 4, "visual_dim": 4, "hash_buckets": 8, "dropout_rate": 0.3},
        imaginator={"num_steps": 10, "hidden_dim": 8, "cond_dim": 4, "time_dim": 4, "hash_buckets": 8},
    )
    model = build_model(config, ["Attack", "Meet"], texts=["troops attacked", "leaders met"], seed=0)
    assert sum(p.numel() for p in model.parameters()) <= 5000
    return model


@pytest.fixture(scope="module")
def batch():
    generator = torch.Generator().manual_seed(0)
    image = lambda: torch.rand(3, 2, 2, generator=generator, dtype=torch.float64) * 2 - 1  # noqa: E731
    return [
        (["troops", "attacked"], image(), "Attack"),
        (["leaders", "met", "today"], image(), "Meet"),
        (["sunny", "weather"], zero_image(2), "none"),
    ]


@pytest.mark.parametrize("objective,beta", [
    ("class", 0.0),
    ("visual", 0.0),
    ("combined", 0.0),
    ("combined", 0.01),
    ("combined", 1.0),
])
def test_full_model_gradients_match_finite_differences(tiny_model, batch, objective, beta):
    tiny_model.train()
    error = gradient_check(tiny_model, batch, epsilon=1e-5, objective=objective, beta=beta)
    assert error <= 1e-4
    assert tiny_model.training


def test_unknown_objective(tiny_model, batch):
    with pytest.raises(ParameterError):
        gradient_check(tiny_model, batch, epsilon=1e-5, objective="contrastive")


class _DropSmallGradients(torch.autograd.Function):
    """forward 為 Σ w·x，backward 只傳回 |w| ≥ 10 的梯度"""

    @staticmethod
    def forward(ctx, x, w):
        ctx.save_for_backward(w)
        return (x * w).sum()

    @staticmethod
    def backward(ctx, grad):
        (w,) = ctx.saved_tensors
        return grad * torch.where(w.abs() >= 10, w, torch.zeros_like(w)), None


def test_random_entries_catch_wrongly_zeroed_gradients():
    param = torch.nn.Parameter(torch.ones(50, dtype=torch.float64))
    weights = torch.ones(50, dtype=torch.float64)
    weights[0] = 10.0
    loss_fn = lambda: _DropSmallGradients.apply(param, weights)  # noqa: E731

    largest_only = check_gradients([("p", param)], loss_fn, entries_per_tensor=1, random_entries=0)
    assert largest_only.max_relative_error == 0.0

    report = check_gradients([("p", param)], loss_fn, entries_per_tensor=1, random_entries=5, seed=3)
    assert report.entries_checked >= 5
    assert report.max_relative_error >= 0.99
