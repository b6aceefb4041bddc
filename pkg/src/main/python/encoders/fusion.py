"""單筆編碼與融合：H = [ENC_L(s); ENC_V(v)]"""

from typing import Sequence

import torch

from ..core.exceptions import InputError, NumericalError
from .backends import BaseEncoderBackend


def encode_text(backend: BaseEncoderBackend, tokens: Sequence[str]) -> torch.Tensor:
    """(text_dim,)；dropout 只在訓練模式生效"""
    if not tokens:
        raise InputError("empty token sequence")
    return backend.encode_texts([list(tokens)])[0]


def encode_image(backend: BaseEncoderBackend, image: torch.Tensor) -> torch.Tensor:
    """(visual_dim,)"""
    if image.dim() != 3:
        raise InputError(f"image must have shape (3, R, R), got {tuple(image.shape)}")
    return backend.encode_images(image.unsqueeze(0))[0]


def fuse(h_s: torch.Tensor, h_v: torch.Tensor) -> torch.Tensor:
    """沿最後一維串接；支援單筆或批次"""
    if not (torch.isfinite(h_s).all() and torch.isfinite(h_v).all()):
        raise NumericalError("non-finite embedding passed to fuse")
    if h_s.shape[:-1] != h_v.shape[:-1]:
        raise InputError(f"batch shapes differ: {tuple(h_s.shape)} vs {tuple(h_v.shape)}")
    return torch.cat([h_s, h_v], dim=-1)
