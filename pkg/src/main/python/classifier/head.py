"""
分類頭與損失

單層前饋（fused_dim → N+1）接 softmax；預測取 argmax，平手取最小標籤索引
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Union

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from ..core.exceptions import InputError, NumericalError, ParameterError

Scalar = Union[float, torch.Tensor]


class ClassifierHead(nn.Module):
    """fused_dim → N+1 的線性層"""

    def __init__(self, fused_dim: int, num_classes: int):
        super().__init__()
        if num_classes < 2:
            raise InputError("classifier needs at least one event type plus none")
        self.fused_dim = fused_dim
        self.num_classes = num_classes
        self.linear = nn.Linear(fused_dim, num_classes)

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        if h.shape[-1] != self.fused_dim:
            raise InputError(f"fused dim {h.shape[-1]} != head input dim {self.fused_dim}")
        logits = self.linear(h)
        if not torch.isfinite(logits).all():
            raise NumericalError("non-finite logits")
        return logits


@dataclass
class Prediction:
    """單筆預測結果"""
    probs: List[float]
    predicted: str
    label_index: int
    logit_margin: float
    labels: List[str] = field(default_factory=list, repr=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "predicted": self.predicted,
            "probs": dict(zip(self.labels, self.probs)),
            "logit_margin": self.logit_margin,
        }


def class_probs(h: torch.Tensor, head: ClassifierHead) -> torch.Tensor:
    """softmax(head(h))"""
    return torch.softmax(head(h), dim=-1)


def argmax_lowest(probs: Sequence[float]) -> int:
    """argmax；numpy 回傳第一個最大值，即最小索引"""
    return int(np.argmax(np.asarray(probs)))


def make_prediction(probs: torch.Tensor, labels: Sequence[str]) -> Prediction:
    values = probs.detach().cpu().double().numpy()
    if len(values) != len(labels):
        raise InputError(f"{len(values)} probabilities for {len(labels)} labels")
    index = argmax_lowest(values)
    ranked = np.sort(values)[::-1]
    # 只有一類時第二名視為 0
    margin = float(ranked[0] - ranked[1]) if len(ranked) > 1 else float(ranked[0])
    return Prediction(
        probs=values.tolist(),
        predicted=labels[index],
        label_index=index,
        logit_margin=margin,
        labels=list(labels),
    )


def cross_entropy(logits: torch.Tensor, gold: torch.Tensor) -> torch.Tensor:
    """平均負對數機率（log-softmax，log-sum-exp 穩定）"""
    return F.cross_entropy(logits, gold, reduction="mean")


def _is_finite(value: Scalar) -> bool:
    if isinstance(value, torch.Tensor):
        return bool(torch.isfinite(value).all())
    return math.isfinite(value)


def combined_loss(class_term: Scalar, visual_term: Scalar, beta: float) -> Scalar:
    """L = L_class + β·L_visual"""
    if beta < 0:
        raise ParameterError(f"beta must be >= 0, got {beta}")
    if not (_is_finite(class_term) and _is_finite(visual_term)):
        raise NumericalError("non-finite loss term")
    if beta == 0:
        return class_term
    return class_term + beta * visual_term
