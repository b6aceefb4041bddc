"""
編碼器後端模組

BaseEncoderBackend 定義文字 / 圖片批次編碼介面；後端以名稱註冊，
toy 後端可端到端訓練且能做有限差分檢查，adapter 後端自行載入預訓練權重
"""

import logging
from abc import ABC, abstractmethod
from typing import Callable, Dict, List, Optional, Sequence, Type

import torch
from torch import nn

from ..core.config import EncoderConfig
from ..core.exceptions import ConfigurationError, InputError
from ..core.seeding import init_uniform_fan_in_, torch_generator
from .tokenizer import HashingTokenizer

logger = logging.getLogger(__name__)


class BaseEncoderBackend(nn.Module, ABC):
    """雙編碼器後端基類"""

    def __init__(self, config: EncoderConfig, tokenizer: HashingTokenizer, resolution: int):
        super().__init__()
        self.config = config
        self.tokenizer = tokenizer
        self.resolution = resolution
        self.text_dim = config.text_dim
        self.visual_dim = config.visual_dim

    @abstractmethod
    def encode_texts(self, batch: Sequence[Sequence[str]]) -> torch.Tensor:
        """(B, text_dim)"""

    @abstractmethod
    def encode_images(self, images: torch.Tensor) -> torch.Tensor:
        """(B, 3, R, R) → (B, visual_dim)"""

    def reset_parameters(self, seed: int) -> None:
        """預設不重設；toy 後端覆寫"""

    def check_images(self, images: torch.Tensor) -> None:
        expected = (3, self.resolution, self.resolution)
        if images.dim() != 4 or tuple(images.shape[1:]) != expected:
            raise InputError(f"images must have shape (B, {expected}), got {tuple(images.shape)}")


_BACKENDS: Dict[str, Type[BaseEncoderBackend]] = {}


def register_backend(name: str) -> Callable[[Type[BaseEncoderBackend]], Type[BaseEncoderBackend]]:
    """以名稱註冊後端類別"""

    def decorator(cls: Type[BaseEncoderBackend]) -> Type[BaseEncoderBackend]:
        if name in _BACKENDS and _BACKENDS[name] is not cls:
            logger.warning(f"Encoder backend '{name}' re-registered")
        _BACKENDS[name] = cls
        return cls

    return decorator


def available_backends() -> List[str]:
    return sorted(_BACKENDS)


@register_backend("toy")
class ToyBackend(BaseEncoderBackend):
    """toy 雙編碼器

    文字：EmbeddingBag(mean) → Linear → Dropout；視覺：flatten → 無偏差 Linear
    """

    def __init__(self, config: EncoderConfig, tokenizer: HashingTokenizer, resolution: int):
        super().__init__(config, tokenizer, resolution)
        token_dim = config.token_dim or config.text_dim
        self.token_embedding = nn.EmbeddingBag(tokenizer.size, token_dim, mode="mean")
        self.text_proj = nn.Linear(token_dim, config.text_dim)
        self.text_dropout = nn.Dropout(config.dropout_rate)
        self.visual_proj = nn.Linear(3 * resolution * resolution, config.visual_dim, bias=False)

    def reset_parameters(self, seed: int) -> None:
        init_uniform_fan_in_(self, torch_generator(seed))

    def encode_texts(self, batch: Sequence[Sequence[str]]) -> torch.Tensor:
        if len(batch) == 0:
            raise InputError("empty text batch")
        packed = self.tokenizer.encode_batch(batch)
        pooled = self.token_embedding(packed["input"], packed["offsets"])
        return self.text_dropout(self.text_proj(pooled))

    def encode_images(self, images: torch.Tensor) -> torch.Tensor:
        self.check_images(images)
        return self.visual_proj(images.reshape(images.shape[0], -1))


class BackendManager:
    """後端管理器 - 依設定建立後端"""

    def __init__(self):
        self.logger = logging.getLogger(f"{__name__}.BackendManager")

    def resolve_name(self, config: EncoderConfig) -> str:
        name = config.adapter_name if config.backend == "adapter" else "toy"
        if name not in _BACKENDS:
            raise ConfigurationError(f"encoder backend '{name}' not registered; available: {available_backends()}")
        return name

    def create(self,
               config: EncoderConfig,
               tokenizer: HashingTokenizer,
               resolution: int,
               seed: int = 0,
               dtype: torch.dtype = torch.float64) -> BaseEncoderBackend:
        name = self.resolve_name(config)
        backend = _BACKENDS[name](config, tokenizer, resolution).to(dtype)
        backend.reset_parameters(seed)
        self.logger.info(f"Encoder backend '{name}' initialized (text_dim={config.text_dim}, visual_dim={config.visual_dim})")
        return backend


def create_backend(config: EncoderConfig,
                   tokenizer: HashingTokenizer,
                   resolution: int,
                   seed: int = 0,
                   dtype: torch.dtype = torch.float64) -> BaseEncoderBackend:
    """建立後端的便捷函數"""
    return BackendManager().create(config, tokenizer, resolution, seed, dtype)
