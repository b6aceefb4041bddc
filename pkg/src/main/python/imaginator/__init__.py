"""
Visual Imaginator 模組

- make_schedule / noising: 變異數保持雜訊排程與前向加噪
- Imaginator: 條件去噪、重建損失、確定性合成
- customize / pretrain: 依凍結策略的 few-shot 客製化與全參數預訓練
- LatentCodec: 潛在空間編解碼介面
"""

from .codec import IdentityCodec, LatentCodec, make_codec
from .customization import VisualPair, customize, fit_imaginator, pairs_from_episode, pretrain
from .denoiser import ConditionEncoder, SinusoidalTimeEmbedding, ToyDenoiser
from .imaginator import FREEZE_POLICIES, Imaginator, build_imaginator, squared_error
from .schedule import NoiseSchedule, make_schedule, noising, schedule_from_descriptor

__all__ = [
    "IdentityCodec",
    "LatentCodec",
    "make_codec",
    "VisualPair",
    "customize",
    "fit_imaginator",
    "pairs_from_episode",
    "pretrain",
    "ConditionEncoder",
    "SinusoidalTimeEmbedding",
    "ToyDenoiser",
    "FREEZE_POLICIES",
    "Imaginator",
    "build_imaginator",
    "squared_error",
    "NoiseSchedule",
    "make_schedule",
    "noising",
    "schedule_from_descriptor",
]
