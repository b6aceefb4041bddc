"""
條件去噪網路

ConditionEncoder 把查詢文字編成條件向量（即客製化時唯一可訓練的部分），
ToyDenoiser 是無卷積的 MLP：輸入 [攤平的 x_t, 時間嵌入, 條件向量]
"""

import math
from typing import Sequence, Tuple

import torch
from torch import nn

from ..encoders.tokenizer import HashingTokenizer


class SinusoidalTimeEmbedding(nn.Module):
    """時間步的正弦位置嵌入：(B,) → (B, dim)"""

    def __init__(self, dim: int):
        super().__init__()
        self.dim = dim

    def forward(self, t: torch.Tensor, dtype: torch.dtype = torch.float64) -> torch.Tensor:
        half_dim = self.dim // 2
        scale = math.log(10000) / max(half_dim - 1, 1)
        freqs = torch.exp(torch.arange(half_dim, dtype=dtype) * -scale)
        angles = t.to(dtype)[:, None] * freqs[None, :]
        return torch.cat([torch.sin(angles), torch.cos(angles)], dim=-1)


class ConditionEncoder(nn.Module):
    """文字條件編碼器：雜湊桶嵌入 → 平均 → Linear

    不依賴字彙，預訓練與客製化語料可以不同
    """

    def __init__(self, hash_buckets: int, cond_dim: int):
        super().__init__()
        self.tokenizer = HashingTokenizer(vocab=[], hash_buckets=hash_buckets)
        self.embedding = nn.EmbeddingBag(hash_buckets, cond_dim, mode="mean")
        self.proj = nn.Linear(cond_dim, cond_dim)

    def forward(self, batch: Sequence[Sequence[str]]) -> torch.Tensor:
        packed = self.tokenizer.encode_batch(batch)
        return self.proj(self.embedding(packed["input"], packed["offsets"]))


class ToyDenoiser(nn.Module):
    """MLP 去噪器，輸出雜訊估計 ε̂（形狀同 x_t）

    ε̂ = x_t + MLP([x_t, 時間嵌入, 條件])；t 接近 T 時 x_t ≈ ε，MLP 只需學殘差
    """

    def __init__(self, latent_shape: Tuple[int, ...], time_dim: int, cond_dim: int, hidden_dim: int):
        super().__init__()
        self.latent_shape = tuple(latent_shape)
        numel = math.prod(self.latent_shape)
        self.time_embedding = SinusoidalTimeEmbedding(time_dim)
        self.net = nn.Sequential(
            nn.Linear(numel + time_dim + cond_dim, hidden_dim),
            nn.SiLU(),
            nn.Linear(hidden_dim, hidden_dim),
            nn.SiLU(),
            nn.Linear(hidden_dim, numel),
        )

    def forward(self, x_t: torch.Tensor, t: torch.Tensor, cond: torch.Tensor) -> torch.Tensor:
        batch = x_t.shape[0]
        features = torch.cat([
            x_t.reshape(batch, -1),
            self.time_embedding(t, dtype=x_t.dtype),
            cond,
        ], dim=-1)
        return x_t + self.net(features).reshape(batch, *self.latent_shape)
