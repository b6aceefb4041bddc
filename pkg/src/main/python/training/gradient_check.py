"""
有限差分梯度檢查

對每個參數張量取解析梯度絕對值最大的幾個元素，再加上以種子抽取的隨機元素，與中央差分比較：
max(|a − c| − δ, 0) / max(|a|, |c|, 1e-12)，δ 為中央差分的捨入與截斷誤差界
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import torch

from ..classifier.head import combined_loss
from ..classifier.model import LabeledExample, VFEventModel, class_loss
from ..core.exceptions import NumericalError, ParameterError
from ..core.seeding import derive_seed, torch_generator

logger = logging.getLogger(__name__)

EPSILON_RANGE = (1e-6, 1e-4)
OBJECTIVES = ("class", "visual", "combined")
ROUNDOFF_FACTOR = 256.0


@dataclass
class GradientCheckReport:
    """檢查結果：最大相對誤差與各張量的最大誤差"""
    max_relative_error: float = 0.0
    per_tensor: Dict[str, float] = field(default_factory=dict)
    entries_checked: int = 0


def check_gradients(named_parameters: Iterable[Tuple[str, torch.nn.Parameter]],
                    loss_fn: Callable[[], torch.Tensor],
                    epsilon: float = 1e-6,
                    entries_per_tensor: int = 3,
                    random_entries: int = 3,
                    seed: int = 0) -> GradientCheckReport:
    """比較 loss_fn 對各參數的解析梯度與中央差分；loss_fn 必須是確定性的"""
    low, high = EPSILON_RANGE
    if not low <= epsilon <= high:
        raise ParameterError(f"epsilon must lie in [{low}, {high}], got {epsilon}")

    params = [(name, p) for name, p in named_parameters if p.requires_grad]
    for name, p in params:
        if p.dtype != torch.float64:
            raise ParameterError(f"gradient check needs float64 parameters; {name} is {p.dtype}")
        p.grad = None

    loss = loss_fn()
    loss.backward()
    analytic = {}
    for name, p in params:
        grad = p.grad.detach().clone() if p.grad is not None else torch.zeros_like(p)
        if not torch.isfinite(grad).all():
            raise NumericalError(f"non-finite analytic gradient for {name}")
        analytic[name] = grad
        p.grad = None

    report = GradientCheckReport()
    unit_roundoff = torch.finfo(torch.float64).eps
    with torch.no_grad():
        for name, p in params:
            flat_grad = analytic[name].reshape(-1)
            k = min(entries_per_tensor, flat_grad.numel())
            indices = torch.topk(flat_grad.abs(), k).indices.tolist()
            # 隨機元素可抓到被錯誤歸零的梯度
            generator = torch_generator(derive_seed(seed, "gradient_check", name))
            sampled = torch.randperm(flat_grad.numel(), generator=generator)[:random_entries].tolist()
            indices += [i for i in sampled if i not in indices]
            flat = p.data.view(-1)
            worst = 0.0
            for index in indices:
                original = flat[index].item()
                flat[index] = original + epsilon
                loss_plus = loss_fn().item()
                flat[index] = original - epsilon
                loss_minus = loss_fn().item()
                flat[index] = original

                a = flat_grad[index].item()
                c = (loss_plus - loss_minus) / (2 * epsilon)
                slack = ROUNDOFF_FACTOR * unit_roundoff * max(abs(loss_plus), abs(loss_minus), 1.0) / epsilon + epsilon ** 2
                error = max(abs(a - c) - slack, 0.0) / max(abs(a), abs(c), 1e-12)
                worst = max(worst, error)
                report.entries_checked += 1
            report.per_tensor[name] = worst
            report.max_relative_error = max(report.max_relative_error, worst)

    logger.debug(f"Gradient check: {report.entries_checked} entries, max rel error {report.max_relative_error:.3e}")
    return report


def model_objective(model: VFEventModel,
                    batch: Sequence[LabeledExample],
                    objective: str = "combined",
                    beta: float = 0.01,
                    timestep: Optional[int] = None,
                    seed: int = 0) -> Callable[[], torch.Tensor]:
    """建立固定 (t, ε) 的損失閉包"""
    if objective not in OBJECTIVES:
        raise ParameterError(f"objective must be one of {OBJECTIVES}")

    resolution = model.resolution
    dtype = model.dtype
    tokens = [list(item[0]) for item in batch]
    images = torch.stack([
        item[1] if item[1] is not None else torch.zeros(3, resolution, resolution, dtype=dtype)
        for item in batch
    ]).to(dtype)
    num_steps = model.imaginator.schedule.num_steps
    t = timestep if timestep is not None else max(1, num_steps // 2)
    eps = torch.randn(images.shape, generator=torch_generator(seed), dtype=dtype)

    def visual() -> torch.Tensor:
        return model.imaginator.visual_loss(tokens, images, images, t, eps)

    def loss_fn() -> torch.Tensor:
        if objective == "class":
            return class_loss(batch, model)
        if objective == "visual":
            return visual()
        return combined_loss(class_loss(batch, model), visual(), beta)

    return loss_fn


def gradient_check(model: VFEventModel,
                   batch: Sequence[LabeledExample],
                   epsilon: float = 1e-6,
                   objective: str = "combined",
                   beta: float = 0.01,
                   entries_per_tensor: int = 3,
                   timestep: Optional[int] = None,
                   seed: int = 0) -> float:
    """整個模型（評估模式、無 dropout）的最大相對梯度誤差"""
    was_training = model.training
    model.eval()
    try:
        report = check_gradients(
            model.named_parameters(),
            model_objective(model, batch, objective, beta, timestep, seed),
            epsilon=epsilon,
            entries_per_tensor=entries_per_tensor,
            seed=seed,
        )
    finally:
        model.train(was_training)
    return report.max_relative_error
