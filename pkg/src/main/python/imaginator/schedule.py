"""
變異數保持（variance-preserving）雜訊排程

x_t = α_t·v + σ_t·ε，α_t² + σ_t² = 1，α_0 = 1、σ_0 = 0
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Union

import numpy as np
import torch

from ..core.exceptions import InputError, ParameterError

COSINE_OFFSET = 0.008
ALPHA_BAR_MIN = 1e-5


def cosine_alpha_bar(num_steps: int, s: float = COSINE_OFFSET, floor: float = ALPHA_BAR_MIN) -> np.ndarray:
    """ᾱ_t = floor + (1 - floor)·f(t)/f(0)，f(t) = cos²(((t/T)+s)/(1+s)·π/2)"""
    t = np.arange(num_steps + 1, dtype=np.float64)
    f = np.cos(((t / num_steps) + s) / (1 + s) * math.pi * 0.5) ** 2
    return floor + (1.0 - floor) * (f / f[0])


def linear_alpha_bar(num_steps: int, beta_start: float = 1e-4, beta_end: float = 0.02) -> np.ndarray:
    """β 線性遞增（依 1000/T 縮放），ᾱ_t = Π_{i≤t}(1 - β_i)"""
    scale = 1000.0 / num_steps
    betas = np.clip(np.linspace(beta_start * scale, beta_end * scale, num_steps, dtype=np.float64), 0.0, 0.999)
    return np.concatenate([[1.0], np.cumprod(1.0 - betas)])


_ALPHA_BAR = {
    "cosine": cosine_alpha_bar,
    "linear": linear_alpha_bar,
}


@dataclass(frozen=True, eq=False)
class NoiseSchedule:
    """每個時間步的 (α_t, σ_t)，t = 0..T"""
    num_steps: int
    kind: str
    alphas: np.ndarray
    sigmas: np.ndarray

    def coefficients(self, t: Union[int, torch.Tensor], like: torch.Tensor):
        """回傳可與 like 廣播的 (α_t, σ_t)；t 可為整數或 (B,) 張量"""
        alphas = torch.as_tensor(self.alphas, dtype=like.dtype)
        sigmas = torch.as_tensor(self.sigmas, dtype=like.dtype)
        if isinstance(t, torch.Tensor) and t.dim() == 1:
            if t.min() < 0 or t.max() > self.num_steps:
                raise InputError(f"timesteps must lie in [0, {self.num_steps}]")
            shape = (t.shape[0],) + (1,) * (like.dim() - 1)
            return alphas[t].reshape(shape), sigmas[t].reshape(shape)
        step = int(t)
        if not 0 <= step <= self.num_steps:
            raise InputError(f"timestep {step} outside [0, {self.num_steps}]")
        return alphas[step], sigmas[step]

    def descriptor(self) -> Dict[str, Any]:
        return {"kind": self.kind, "num_steps": self.num_steps}


def make_schedule(num_steps: int, kind: str = "cosine") -> NoiseSchedule:
    """建立排程；kind ∈ {cosine, linear}"""
    if num_steps < 1:
        raise ParameterError(f"num_steps must be >= 1, got {num_steps}")
    if kind not in _ALPHA_BAR:
        raise ParameterError(f"unknown schedule kind '{kind}', choose from {sorted(_ALPHA_BAR)}")

    alpha_bar = _ALPHA_BAR[kind](num_steps)
    alphas = np.sqrt(alpha_bar)
    sigmas = np.sqrt(1.0 - alpha_bar)
    alphas[0], sigmas[0] = 1.0, 0.0
    return NoiseSchedule(num_steps=num_steps, kind=kind, alphas=alphas, sigmas=sigmas)


def schedule_from_descriptor(descriptor: Dict[str, Any]) -> NoiseSchedule:
    return make_schedule(int(descriptor["num_steps"]), str(descriptor["kind"]))


def noising(v: torch.Tensor, t: Union[int, torch.Tensor], eps: torch.Tensor, schedule: NoiseSchedule) -> torch.Tensor:
    """α_t·v + σ_t·eps（逐元素）"""
    if eps.shape != v.shape:
        raise InputError(f"noise shape {tuple(eps.shape)} != image shape {tuple(v.shape)}")
    alpha, sigma = schedule.coefficients(t, like=v)
    return alpha * v + sigma * eps
