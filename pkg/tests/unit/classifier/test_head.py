"""分類頭與損失測試"""

import math

import pytest
import torch

from src.main.python.classifier.head import (
    ClassifierHead,
    argmax_lowest,
    class_probs,
    combined_loss,
    cross_entropy,
    make_prediction,
)
from src.main.python.core.exceptions import InputError, NumericalError, ParameterError


@pytest.fixture
def head():
    torch.manual_seed(0)
    return ClassifierHead(6, 3).double()


def test_probabilities_sum_to_one_and_ignore_shifts(head):
    h = torch.randn(4, 6, dtype=torch.float64)
    probs = class_probs(h, head)
    assert torch.allclose(probs.sum(dim=-1), torch.ones(4, dtype=torch.float64), atol=1e-6)

    logits = head(h)
    shifted = torch.softmax(logits + 123.0, dim=-1)
    assert torch.allclose(torch.softmax(logits, dim=-1), shifted, atol=1e-9)


def test_ties_break_to_lowest_index():
    assert argmax_lowest([0.25, 0.25, 0.5]) == 2
    assert argmax_lowest([0.4, 0.4, 0.2]) == 0
    prediction = make_prediction(torch.tensor([0.5, 0.5], dtype=torch.float64), ["A", "none"])
    assert prediction.predicted == "A"
    assert prediction.logit_margin == 0.0


def test_prediction_margin_is_top_two_probability_gap():
    prediction = make_prediction(torch.tensor([0.6, 0.3, 0.1], dtype=torch.float64), ["A", "B", "none"])
    assert prediction.predicted == "A"
    assert prediction.logit_margin == pytest.approx(0.3, abs=1e-12)

    unordered = make_prediction(torch.tensor([0.2, 0.1, 0.7], dtype=torch.float64), ["A", "B", "none"])
    assert unordered.predicted == "none"
    assert unordered.logit_margin == pytest.approx(0.5, abs=1e-12)
    assert set(prediction.to_dict()["probs"]) == {"A", "B", "none"}


def test_cross_entropy_closed_forms():
    uniform = torch.zeros(5, 9, dtype=torch.float64)
    gold = torch.arange(5) % 9
    assert abs(cross_entropy(uniform, gold).item() - math.log(9)) <= 1e-9

    half = torch.log(torch.tensor([[0.5, 0.25, 0.25]], dtype=torch.float64))
    assert cross_entropy(half, torch.tensor([0])).item() == pytest.approx(math.log(2), abs=1e-12)

    confident = torch.tensor([[1000.0, 0.0, 0.0]], dtype=torch.float64)
    assert cross_entropy(confident, torch.tensor([0])).item() == 0.0
    assert math.isfinite(cross_entropy(confident, torch.tensor([1])).item())


def test_combined_loss_arithmetic():
    assert combined_loss(2.0, 30.0, 0.01) == 2.3
    assert combined_loss(2.0, 30.0, 0.0) == 2.0
    assert combined_loss(2.0, 0.0, 0.5) == 2.0
    for beta in (0.0, 0.01, 1.0):
        slope = combined_loss(1.0, 3.0, beta) - combined_loss(1.0, 2.0, beta)
        assert slope == pytest.approx(beta, abs=1e-15)


def test_combined_loss_guards():
    with pytest.raises(ParameterError):
        combined_loss(1.0, 1.0, -0.1)
    with pytest.raises(NumericalError):
        combined_loss(float("nan"), 1.0, 0.1)
    with pytest.raises(NumericalError):
        combined_loss(1.0, torch.tensor(float("inf")), 0.1)


def test_head_checks_dimensions(head):
    with pytest.raises(InputError):
        head(torch.zeros(1, 5, dtype=torch.float64))
    with pytest.raises(InputError):
        ClassifierHead(4, 1)
