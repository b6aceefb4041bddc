"""
Visual Imaginator - 文字條件擴散模型

實作：
1. 前向加噪 x_t = α_t·v + σ_t·ε
2. 去噪器輸出 ε̂，重建 (x_t − σ_t·ε̂)/α_t
3. 重建空間損失 ω‖重建 − target‖²
4. 以固定種子的 DDIM 式確定性取樣合成圖片
"""

import logging
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import torch
from torch import nn

from ..core.config import ImaginatorConfig
from ..core.exceptions import InputError, NumericalError, ParameterError
from ..core.seeding import init_uniform_fan_in_, torch_generator
from .codec import LatentCodec, make_codec
from .denoiser import ConditionEncoder, ToyDenoiser
from .schedule import NoiseSchedule, make_schedule, noising

logger = logging.getLogger(__name__)

FREEZE_POLICIES = ("cond_encoder", "all_trainable")
COND_PREFIX = "cond_encoder."

Timestep = Union[int, torch.Tensor]


def squared_error(prediction: torch.Tensor, target: torch.Tensor, omega: float = 1.0) -> torch.Tensor:
    """ω·Σ(prediction − target)²；批次輸入時對每筆求和後取平均"""
    if prediction.shape != target.shape:
        raise InputError(f"prediction shape {tuple(prediction.shape)} != target shape {tuple(target.shape)}")
    diff = (prediction - target).reshape(prediction.shape[0], -1) if prediction.dim() == 4 else (prediction - target).reshape(1, -1)
    return omega * (diff ** 2).sum(dim=1).mean()


class Imaginator(nn.Module):
    """文字條件擴散模型（條件編碼器 + 去噪器 + 排程）"""

    def __init__(self,
                 config: ImaginatorConfig,
                 resolution: int,
                 codec: Optional[LatentCodec] = None):
        super().__init__()
        self.config = config
        self.resolution = resolution
        self.codec = codec or make_codec(config.codec)
        self.schedule: NoiseSchedule = make_schedule(config.num_steps, config.schedule)
        self.omega = float(config.omega)
        latent_shape = self.codec.latent_shape(resolution)
        self.cond_encoder = ConditionEncoder(config.hash_buckets, config.cond_dim)
        self.denoiser = ToyDenoiser(latent_shape, config.time_dim, config.cond_dim, config.hidden_dim)
        self.trainable_mask: Dict[str, bool] = {name: True for name, _ in self.named_parameters()}

    @property
    def dtype(self) -> torch.dtype:
        return next(self.parameters()).dtype

    def reset_parameters(self, seed: int) -> None:
        init_uniform_fan_in_(self, torch_generator(seed))

    # ------------------------------------------------------------------
    # 凍結策略
    # ------------------------------------------------------------------

    def mask_for_policy(self, policy: str) -> Dict[str, bool]:
        if policy not in FREEZE_POLICIES:
            raise ParameterError(f"unknown freeze policy '{policy}'")
        if policy == "all_trainable":
            return {name: True for name, _ in self.named_parameters()}
        return {name: name.startswith(COND_PREFIX) for name, _ in self.named_parameters()}

    def apply_freeze_policy(self, policy: str) -> Dict[str, bool]:
        """設定 requires_grad 並記錄 trainable_mask"""
        self.trainable_mask = self.mask_for_policy(policy)
        for name, param in self.named_parameters():
            param.requires_grad_(self.trainable_mask[name])
        return dict(self.trainable_mask)

    def trainable_parameters(self) -> List[nn.Parameter]:
        return [p for name, p in self.named_parameters() if self.trainable_mask.get(name, False)]

    # ------------------------------------------------------------------
    # 去噪
    # ------------------------------------------------------------------

    def encode_condition(self, batch: Sequence[Sequence[str]]) -> torch.Tensor:
        if len(batch) == 0 or any(len(tokens) == 0 for tokens in batch):
            raise InputError("empty token sequence")
        return self.cond_encoder(batch)

    def _timesteps(self, t: Timestep, batch: int) -> torch.Tensor:
        if isinstance(t, torch.Tensor) and t.dim() == 1:
            return t.long()
        return torch.full((batch,), int(t), dtype=torch.long)

    def predict_noise(self, x_t: torch.Tensor, t: Timestep, cond: torch.Tensor) -> torch.Tensor:
        """去噪器直接輸出 ε̂"""
        return self.denoiser(x_t, self._timesteps(t, x_t.shape[0]), cond)

    def reconstruct(self, x_t: torch.Tensor, t: Timestep, cond: torch.Tensor) -> torch.Tensor:
        """重建空間輸出 (x_t − σ_t·ε̂)/α_t"""
        steps = self._timesteps(t, x_t.shape[0])
        eps_hat = self.predict_noise(x_t, steps, cond)
        alpha, sigma = self.schedule.coefficients(steps, like=x_t)
        return (x_t - sigma * eps_hat) / alpha

    def visual_loss(self,
                    batch: Sequence[Sequence[str]],
                    v: torch.Tensor,
                    target: torch.Tensor,
                    t: Timestep,
                    eps: torch.Tensor) -> torch.Tensor:
        """ω‖F(α_t·v + σ_t·ε, s) − target‖²，批次平均"""
        if v.dim() == 3:
            v, target, eps = v.unsqueeze(0), target.unsqueeze(0), eps.unsqueeze(0)
        if target.shape != v.shape:
            raise InputError(f"target shape {tuple(target.shape)} != image shape {tuple(v.shape)}")
        if len(batch) != v.shape[0]:
            raise InputError(f"{len(batch)} texts for {v.shape[0]} images")

        latent = self.codec.encode(v)
        target_latent = self.codec.encode(target)
        steps = self._timesteps(t, latent.shape[0])
        x_t = noising(latent, steps, eps, self.schedule)
        cond = self.encode_condition(batch)
        prediction = self.reconstruct(x_t, steps, cond)
        if not torch.isfinite(prediction).all():
            raise NumericalError(
                f"non-finite denoiser output (timesteps {steps.tolist()}, |x_t|max={x_t.abs().max().item():.3g})"
            )
        return squared_error(prediction, target_latent, self.omega)

    # ------------------------------------------------------------------
    # 取樣
    # ------------------------------------------------------------------

    def sampling_timesteps(self, num_sample_steps: int) -> List[int]:
        """T → 0 之間均勻分布的遞減整數時間步（含兩端）"""
        grid = np.linspace(self.schedule.num_steps, 0, num_sample_steps + 1).round().astype(np.int64)
        unique: List[int] = []
        for step in grid.tolist():
            if not unique or step != unique[-1]:
                unique.append(step)
        return unique

    @torch.no_grad()
    def synthesize(self, tokens: Sequence[str], num_sample_steps: Optional[int] = None, seed: int = 0) -> torch.Tensor:
        """由文字合成 (3, R, R) 圖片；同一 (狀態, 文字, seed) 結果完全相同"""
        steps = num_sample_steps if num_sample_steps is not None else self.config.sample_steps
        if steps < 1:
            raise ParameterError(f"num_sample_steps must be >= 1, got {steps}")
        if not tokens:
            raise InputError("empty token sequence")

        dtype = self.dtype
        generator = torch_generator(seed)
        latent_shape = self.codec.latent_shape(self.resolution)
        x = torch.randn((1, *latent_shape), generator=generator, dtype=dtype)
        cond = self.encode_condition([list(tokens)])

        timesteps = self.sampling_timesteps(steps)
        for t_cur, t_next in zip(timesteps[:-1], timesteps[1:]):
            clean = self.reconstruct(x, t_cur, cond).clamp(-1.0, 1.0)
            alpha, sigma = self.schedule.coefficients(t_cur, like=x)
            eps_hat = (x - alpha * clean) / sigma
            alpha_next, sigma_next = self.schedule.coefficients(t_next, like=x)
            x = alpha_next * clean + sigma_next * eps_hat
            if not torch.isfinite(x).all():
                raise NumericalError(f"non-finite sample at timestep {t_cur}")

        return self.codec.decode(x)[0].clamp(-1.0, 1.0)

    def descriptor(self) -> Dict[str, object]:
        return {"schedule": self.schedule.descriptor(), "omega": self.omega, "codec": self.codec.name}


def build_imaginator(config: ImaginatorConfig,
                     resolution: int,
                     seed: int = 0,
                     dtype: torch.dtype = torch.float64) -> Imaginator:
    """建立並以種子初始化"""
    imaginator = Imaginator(config, resolution).to(dtype)
    imaginator.reset_parameters(seed)
    logger.debug(f"Imaginator built: {sum(p.numel() for p in imaginator.parameters())} parameters")
    return imaginator
