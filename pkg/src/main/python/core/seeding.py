"""
亂數種子工具

所有隨機性都從單一全域種子衍生，各用途拿自己的 torch.Generator / numpy Generator
"""

import hashlib
import random

import numpy as np
import torch

_SEED_MODULUS = 2 ** 63


def derive_seed(global_seed: int, *keys: object) -> int:
    """穩定衍生子種子：sha256("global:key1:key2...") mod 2^63"""
    material = ":".join([str(global_seed), *(str(k) for k in keys)])
    digest = hashlib.sha256(material.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % _SEED_MODULUS


def seed_everything(seed: int) -> None:
    """設定 python / numpy / torch 全域亂數狀態（影響 dropout）"""
    random.seed(seed)
    np.random.seed(seed % (2 ** 32))
    torch.manual_seed(seed)


def torch_generator(seed: int) -> torch.Generator:
    generator = torch.Generator()
    generator.manual_seed(seed)
    return generator


def numpy_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def resolve_dtype(precision: str) -> torch.dtype:
    return torch.float64 if precision == "float64" else torch.float32


@torch.no_grad()
def init_uniform_fan_in_(module: torch.nn.Module, generator: torch.Generator) -> None:
    """以 U(-1/√fan_in, 1/√fan_in) 重設所有 Linear 權重與偏差，Embedding 以 U(-1, 1)"""
    for sub in module.modules():
        if isinstance(sub, torch.nn.Linear):
            bound = 1.0 / float(sub.in_features) ** 0.5
            sub.weight.copy_(torch.rand(sub.weight.shape, generator=generator, dtype=sub.weight.dtype) * 2 * bound - bound)
            if sub.bias is not None:
                sub.bias.copy_(torch.rand(sub.bias.shape, generator=generator, dtype=sub.bias.dtype) * 2 * bound - bound)
        elif isinstance(sub, (torch.nn.Embedding, torch.nn.EmbeddingBag)):
            sub.weight.copy_(torch.rand(sub.weight.shape, generator=generator, dtype=sub.weight.dtype) * 2 - 1)
