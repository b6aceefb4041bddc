"""
Few-shot 訓練流程

staged（預設）：Imaginator 客製化（L_visual）→ 編碼器 + 分類頭微調（L_class）
joint：每步最小化 L_class + β·L_visual；L_visual 的梯度只流向 Imaginator 可訓練參數
"""

import copy
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import torch

from ..classifier.head import combined_loss
from ..classifier.model import VFEventModel, build_model
from ..core.config import RunConfig
from ..core.exceptions import ConfigurationError, InputError, NumericalError, TrainingError
from ..core.seeding import derive_seed, numpy_rng, resolve_dtype, torch_generator
from ..data.dataset import Instance
from ..data.images import load_images
from ..data.sampler import Episode
from ..imaginator.customization import VisualPair, customize, pretrain
from .checkpoint import load_checkpoint, save_checkpoint
from .train_log import TrainLog

logger = logging.getLogger(__name__)


def load_support_images(episode: Episode, config: RunConfig, dtype: torch.dtype = torch.float64) -> List[torch.Tensor]:
    """依 support 順序解碼圖片；沒有圖片的 none 句子使用零圖片"""
    missing = [i.id for i in episode.support if i.image_ref is None and not i.is_none]
    if missing:
        raise InputError(f"support instances without images: {', '.join(missing)}")
    refs = [episode.resolve_image(i) for i in episode.support]
    return load_images(refs, config.data.resolution, workers=config.data.decode_workers, dtype=dtype)


def support_pool(episode: Episode, images: Sequence[torch.Tensor]) -> Tuple[List[Instance], Optional[torch.Tensor]]:
    """retrieve 模式的檢索池：support 中帶圖片的 (文字, 圖片)"""
    keep = [k for k, instance in enumerate(episode.support) if instance.image_ref is not None]
    if not keep:
        return [], None
    return [episode.support[k] for k in keep], torch.stack([images[k] for k in keep])


class Trainer:
    """訓練管理器"""

    def __init__(self, config: RunConfig, checkpoint_dir: Optional[Path] = None):
        self.config = config
        self.checkpoint_dir = Path(checkpoint_dir) if checkpoint_dir else None
        self.dtype = resolve_dtype(config.train.precision)
        self.logger = logging.getLogger(f"{__name__}.Trainer")

    def _initial_model(self, episode: Episode, init_model: Optional[VFEventModel]) -> VFEventModel:
        if init_model is None:
            return build_model(
                self.config,
                episode.event_types,
                texts=[i.text for i in episode.support],
                seed=self.config.train.seed,
                dtype=self.dtype,
            )
        if list(init_model.event_types) != list(episode.event_types):
            raise ConfigurationError(
                f"initial model event types {init_model.event_types} differ from episode {episode.event_types}"
            )
        return copy.deepcopy(init_model)

    def _prepare_imaginator(self, model: VFEventModel, pairs: List[VisualPair], log: TrainLog) -> None:
        config = self.config
        if config.imaginator.init_checkpoint:
            loaded = load_checkpoint(Path(config.imaginator.init_checkpoint))
            model.imaginator.load_state_dict(loaded.model.imaginator.state_dict())
            self.logger.info(f"Imaginator initialized from {config.imaginator.init_checkpoint}")

        if config.imaginator.pretrain_steps > 0:
            model.imaginator = pretrain(
                model.imaginator,
                pairs,
                steps=config.imaginator.pretrain_steps,
                learning_rate=config.imaginator.learning_rate,
                seed=derive_seed(config.train.seed, "pretrain"),
                batch_size=config.imaginator.batch_size,
                on_step=lambda step, loss: log.record("pretrain", visual_loss=loss),
            )

    def train(self,
              episode: Episode,
              init_model: Optional[VFEventModel] = None,
              images: Optional[List[torch.Tensor]] = None) -> Tuple[VFEventModel, TrainLog]:
        """訓練並回傳 (模型, 訓練紀錄)；epochs=0 時模型與初始化完全相同"""
        config = self.config
        cfg = config.train
        if not episode.support:
            raise InputError("episode has an empty support set")

        model = self._initial_model(episode, init_model)
        log = TrainLog()
        if cfg.epochs == 0:
            model.eval()
            return model, log

        images = images if images is not None else load_support_images(episode, config, self.dtype)
        pairs = [
            VisualPair(key=instance.id, tokens=instance.tokens, image=image, target=image)
            for instance, image in zip(episode.support, images)
            if instance.image_ref is not None
        ]

        try:
            self._prepare_imaginator(model, pairs, log)
            if cfg.mode == "staged":
                model.imaginator = customize(
                    model.imaginator,
                    pairs,
                    config,
                    on_step=lambda step, loss: log.record("customize", visual_loss=loss),
                )
            else:
                model.imaginator.apply_freeze_policy(cfg.freeze_policy)
            self._fine_tune(model, episode, images, pairs, log)
        except NumericalError as e:
            raise TrainingError(str(e), step=log.next_step, log=log) from e

        model.eval()
        return model, log

    def _fine_tune(self,
                   model: VFEventModel,
                   episode: Episode,
                   images: List[torch.Tensor],
                   pairs: List[VisualPair],
                   log: TrainLog) -> None:
        config = self.config
        cfg = config.train
        joint = cfg.mode == "joint"
        stage = "joint" if joint else "finetune"
        use_text = cfg.train_modality != "visual"
        use_visual = cfg.train_modality != "text"

        # dropout 的亂數狀態在兩種模式下相同
        torch.manual_seed(derive_seed(cfg.seed, "finetune"))
        optimizer = torch.optim.Adam(model.classifier_parameters(), lr=cfg.learning_rate, betas=cfg.adam_betas, weight_decay=0.0)
        imaginator_optimizer = None
        if joint and model.imaginator.trainable_parameters():
            imaginator_optimizer = torch.optim.Adam(
                model.imaginator.trainable_parameters(),
                lr=config.imaginator.learning_rate,
                betas=cfg.adam_betas,
                weight_decay=0.0,
            )
        noise = torch_generator(derive_seed(cfg.seed, "joint", "noise"))
        num_steps = model.imaginator.schedule.num_steps

        support = episode.support
        tokens = [i.tokens for i in support]
        stacked = torch.stack(images).to(model.dtype)
        golds = torch.tensor([model.label_index(i.label) for i in support], dtype=torch.long)
        has_image = [i.image_ref is not None for i in support]

        model.train()
        for epoch in range(cfg.epochs):
            order = numpy_rng(derive_seed(cfg.seed, "finetune", "epoch", epoch)).permutation(len(support)).tolist()
            epoch_losses = []
            for start in range(0, len(order), cfg.batch_size):
                index = order[start:start + cfg.batch_size]
                batch_tokens = [tokens[k] for k in index]
                class_term = model.class_loss(batch_tokens, stacked[index], golds[index], use_text, use_visual)

                visual_value = None
                if joint:
                    with_image = [k for k in index if has_image[k]]
                    if with_image:
                        v = stacked[with_image]
                        t = torch.randint(1, num_steps + 1, (len(with_image),), generator=noise)
                        eps = torch.randn(v.shape, generator=noise, dtype=v.dtype)
                        visual_term = model.imaginator.visual_loss([tokens[k] for k in with_image], v, v, t, eps)
                    else:
                        visual_term = torch.zeros((), dtype=class_term.dtype)
                    total = combined_loss(class_term, visual_term, cfg.beta)
                    visual_value = float(visual_term.detach())
                else:
                    total = class_term

                if not torch.isfinite(total):
                    raise TrainingError(f"{stage}: non-finite loss", step=log.next_step, log=log)

                optimizer.zero_grad()
                if imaginator_optimizer is not None:
                    imaginator_optimizer.zero_grad()
                total.backward()
                optimizer.step()
                if imaginator_optimizer is not None:
                    imaginator_optimizer.step()

                record = log.record(
                    stage,
                    epoch=epoch,
                    class_loss=float(class_term.detach()),
                    visual_loss=visual_value,
                    combined_loss=float(total.detach()),
                )
                epoch_losses.append(record.class_loss)

            self.logger.info(
                f"[{stage}] epoch {epoch + 1}/{cfg.epochs} class_loss={sum(epoch_losses) / len(epoch_losses):.4f}"
            )
            self._maybe_checkpoint(model, episode, images, epoch, log)

    def _maybe_checkpoint(self,
                          model: VFEventModel,
                          episode: Episode,
                          images: List[torch.Tensor],
                          epoch: int,
                          log: TrainLog) -> None:
        every = self.config.train.checkpoint_every
        if not every or self.checkpoint_dir is None or (epoch + 1) % every:
            return
        pool_instances, pool_images = support_pool(episode, images)
        path = self.checkpoint_dir / f"checkpoint_epoch{epoch + 1:03d}.vfe"
        save_checkpoint(model, path, self.config, pool_instances, pool_images)
        log.final_checkpoint = str(path)


def train(episode: Episode,
          config: RunConfig,
          init_model: Optional[VFEventModel] = None,
          checkpoint_dir: Optional[Path] = None) -> Tuple[VFEventModel, TrainLog]:
    """訓練的便捷函數"""
    return Trainer(config, checkpoint_dir).train(episode, init_model)
