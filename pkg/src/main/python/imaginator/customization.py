"""
Imaginator 預訓練與 few-shot 客製化

pretrain: 所有參數可訓練（代替預訓練擴散權重的起點）
customize: 依凍結策略只更新條件文字編碼器，被凍結的參數逐位元不變
"""

import copy
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import torch

from ..core.config import RunConfig
from ..core.exceptions import CustomizationError, NumericalError
from ..core.seeding import derive_seed, numpy_rng, torch_generator
from ..data.images import load_image
from ..data.sampler import Episode
from .imaginator import Imaginator

logger = logging.getLogger(__name__)

StepCallback = Callable[[int, float], None]


@dataclass
class VisualPair:
    """一組 (文字, 圖片, 重建目標)"""
    key: str
    tokens: List[str]
    image: torch.Tensor
    target: torch.Tensor


def pairs_from_episode(episode: Episode, resolution: int, dtype: torch.dtype = torch.float64) -> List[VisualPair]:
    """取 support 中所有帶圖片的句子（無圖片的 none 句子略過）"""
    pairs = []
    for instance in episode.support:
        path = episode.resolve_image(instance)
        if path is None:
            continue
        image = load_image(path, resolution, dtype)
        pairs.append(VisualPair(key=instance.id, tokens=instance.tokens, image=image, target=image))
    return pairs


def fit_imaginator(imaginator: Imaginator,
                   pairs: Sequence[VisualPair],
                   parameters: Sequence[torch.nn.Parameter],
                   steps: int,
                   learning_rate: float,
                   batch_size: int,
                   seed: int,
                   stage: str,
                   betas=(0.9, 0.999),
                   on_step: Optional[StepCallback] = None) -> List[float]:
    """以 Adam 最小化 visual_loss；批次順序每輪以 (seed, stage, epoch) 衍生的種子洗牌"""
    if steps <= 0:
        return []
    optimizer = torch.optim.Adam(list(parameters), lr=learning_rate, betas=betas, weight_decay=0.0)
    noise = torch_generator(derive_seed(seed, stage, "noise"))
    dtype = imaginator.dtype
    num_steps = imaginator.schedule.num_steps

    losses: List[float] = []
    order: List[int] = []
    epoch = 0
    imaginator.train()
    for step in range(steps):
        # 每輪獨立洗牌，最後一個不足額的批次照常使用
        if not order:
            order = numpy_rng(derive_seed(seed, stage, "epoch", epoch)).permutation(len(pairs)).tolist()
            epoch += 1
        indices, order = order[:batch_size], order[batch_size:]
        batch = [pairs[i] for i in indices]

        v = torch.stack([p.image for p in batch]).to(dtype)
        target = torch.stack([p.target for p in batch]).to(dtype)
        t = torch.randint(1, num_steps + 1, (len(batch),), generator=noise)
        eps = torch.randn(v.shape, generator=noise, dtype=dtype)

        loss = imaginator.visual_loss([p.tokens for p in batch], v, target, t, eps)
        if not torch.isfinite(loss):
            raise NumericalError(f"{stage}: non-finite visual loss at step {step}")
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()

        value = float(loss.detach())
        losses.append(value)
        if on_step is not None:
            on_step(step, value)

    imaginator.eval()
    return losses


def default_customize_steps(config: RunConfig, num_pairs: int) -> int:
    if config.imaginator.customize_steps is not None:
        return config.imaginator.customize_steps
    return config.train.epochs * math.ceil(num_pairs / config.imaginator.batch_size)


def customize(imaginator: Imaginator,
              support,
              config: RunConfig,
              steps: Optional[int] = None,
              on_step: Optional[StepCallback] = None) -> Imaginator:
    """few-shot 客製化，回傳新的 Imaginator（輸入不被修改）

    support 可以是 Episode 或 VisualPair 序列；target_policy 為 synthesized 時，
    重建目標改為未客製化模型對該文字的合成圖
    """
    pairs = list(support) if not isinstance(support, Episode) else pairs_from_episode(
        support, imaginator.resolution, imaginator.dtype)
    if not pairs:
        raise CustomizationError("support set has no images to customize on")

    if config.imaginator.target_policy == "synthesized":
        pairs = [
            VisualPair(
                key=p.key,
                tokens=p.tokens,
                image=p.image,
                target=imaginator.synthesize(p.tokens, seed=derive_seed(config.train.seed, "target", p.key)),
            )
            for p in pairs
        ]

    customized = copy.deepcopy(imaginator)
    customized.apply_freeze_policy(config.train.freeze_policy)
    num_steps = steps if steps is not None else default_customize_steps(config, len(pairs))

    losses = fit_imaginator(
        customized,
        pairs,
        customized.trainable_parameters(),
        steps=num_steps,
        learning_rate=config.imaginator.learning_rate,
        batch_size=config.imaginator.batch_size,
        seed=config.train.seed,
        stage="customize",
        betas=config.train.adam_betas,
        on_step=on_step,
    )
    if losses:
        logger.info(f"Customized imaginator: {num_steps} steps, visual loss {losses[0]:.4f} -> {losses[-1]:.4f}")
    return customized


def pretrain(imaginator: Imaginator,
             pairs: Sequence[VisualPair],
             steps: int,
             learning_rate: float,
             seed: int,
             batch_size: int = 4,
             on_step: Optional[StepCallback] = None) -> Imaginator:
    """全部參數可訓練的預訓練，回傳新的 Imaginator"""
    if not pairs:
        raise CustomizationError("no image pairs to pretrain on")
    pretrained = copy.deepcopy(imaginator)
    pretrained.apply_freeze_policy("all_trainable")
    losses = fit_imaginator(
        pretrained,
        pairs,
        pretrained.trainable_parameters(),
        steps=steps,
        learning_rate=learning_rate,
        batch_size=batch_size,
        seed=seed,
        stage="pretrain",
        on_step=on_step,
    )
    if losses:
        logger.info(f"Pretrained imaginator: {steps} steps, visual loss {losses[0]:.4f} -> {losses[-1]:.4f}")
    return pretrained
