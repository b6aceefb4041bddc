"""
分類模組

- ClassifierHead / class_probs: 單層前饋 + softmax
- VFEventModel: 編碼器、分類頭與 Imaginator 的統一模型狀態
- class_loss / combined_loss: 交叉熵與 L_class + β·L_visual
"""

from .head import (
    ClassifierHead,
    Prediction,
    argmax_lowest,
    class_probs,
    combined_loss,
    cross_entropy,
    make_prediction,
)
from .model import VFEventModel, build_model, class_loss, predict_event

__all__ = [
    "ClassifierHead",
    "Prediction",
    "argmax_lowest",
    "class_probs",
    "combined_loss",
    "cross_entropy",
    "make_prediction",
    "VFEventModel",
    "build_model",
    "class_loss",
    "predict_event",
]
