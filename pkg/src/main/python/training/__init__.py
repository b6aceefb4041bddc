"""
訓練模組

- Trainer / train: staged 與 joint 兩種訓練流程
- TrainLog: 每步損失紀錄與 CSV 匯出
- gradient_check: 有限差分梯度驗證
- save_checkpoint / load_checkpoint: 統一 checkpoint 封存檔
"""

from .checkpoint import FORMAT_VERSION, LoadedCheckpoint, load_checkpoint, read_manifest, save_checkpoint
from .gradient_check import GradientCheckReport, check_gradients, gradient_check, model_objective
from .train_log import StepRecord, TrainLog
from .trainer import Trainer, load_support_images, support_pool, train

__all__ = [
    "FORMAT_VERSION",
    "LoadedCheckpoint",
    "load_checkpoint",
    "read_manifest",
    "save_checkpoint",
    "GradientCheckReport",
    "check_gradients",
    "gradient_check",
    "model_objective",
    "StepRecord",
    "TrainLog",
    "Trainer",
    "load_support_images",
    "support_pool",
    "train",
]
