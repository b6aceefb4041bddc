"""
潛在空間編解碼介面

擴散在 codec.encode(v) 上進行，合成結果經 codec.decode 回到像素空間；
桌面規模使用恆等 codec（直接在像素空間）
"""

from abc import ABC, abstractmethod
from typing import Dict, Type

import torch

from ..core.exceptions import ConfigurationError


class LatentCodec(ABC):
    """圖片 ↔ 潛在表示"""

    name: str = "abstract"

    @abstractmethod
    def encode(self, images: torch.Tensor) -> torch.Tensor:
        pass

    @abstractmethod
    def decode(self, latents: torch.Tensor) -> torch.Tensor:
        pass

    def latent_shape(self, resolution: int):
        return (3, resolution, resolution)


class IdentityCodec(LatentCodec):
    name = "identity"

    def encode(self, images: torch.Tensor) -> torch.Tensor:
        return images

    def decode(self, latents: torch.Tensor) -> torch.Tensor:
        return latents


CODECS: Dict[str, Type[LatentCodec]] = {IdentityCodec.name: IdentityCodec}


def make_codec(name: str = "identity") -> LatentCodec:
    if name not in CODECS:
        raise ConfigurationError(f"unknown latent codec '{name}'")
    return CODECS[name]()
