"""
VF 事件分類模型

把編碼器後端、分類頭與 Visual Imaginator 包成一個模型狀態：
H = [ENC_L(s); ENC_V(v)]，P(e|s,v) = softmax(FNN(H))
"""

import logging
from typing import List, Optional, Sequence, Tuple

import torch
from torch import nn

from ..core.config import RunConfig
from ..core.exceptions import InputError
from ..core.seeding import derive_seed, init_uniform_fan_in_, torch_generator
from ..data.dataset import NONE_LABEL
from ..encoders.backends import BaseEncoderBackend, create_backend
from ..encoders.fusion import fuse
from ..encoders.tokenizer import HashingTokenizer
from ..imaginator.imaginator import Imaginator, build_imaginator
from .head import ClassifierHead, Prediction, class_probs, cross_entropy, make_prediction

logger = logging.getLogger(__name__)

# (tokens, image 或 None, gold 標籤)
LabeledExample = Tuple[Sequence[str], Optional[torch.Tensor], str]


class VFEventModel(nn.Module):
    """encoder + head + imaginator"""

    def __init__(self,
                 backend: BaseEncoderBackend,
                 head: ClassifierHead,
                 imaginator: Imaginator,
                 event_types: Sequence[str]):
        super().__init__()
        if head.num_classes != len(event_types) + 1:
            raise InputError(f"head has {head.num_classes} outputs for {len(event_types)} event types + none")
        self.backend = backend
        self.head = head
        self.imaginator = imaginator
        self.event_types = list(event_types)

    @property
    def labels(self) -> List[str]:
        return [*self.event_types, NONE_LABEL]

    @property
    def tokenizer(self) -> HashingTokenizer:
        return self.backend.tokenizer

    @property
    def resolution(self) -> int:
        return self.backend.resolution

    @property
    def dtype(self) -> torch.dtype:
        return self.head.linear.weight.dtype

    def label_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError as e:
            raise InputError(f"unknown label '{label}'") from e

    def classifier_parameters(self) -> List[nn.Parameter]:
        """θ_class：編碼器與分類頭"""
        return [*self.backend.parameters(), *self.head.parameters()]

    def fused(self,
              batch: Sequence[Sequence[str]],
              images: Optional[torch.Tensor],
              use_text: bool = True,
              use_visual: bool = True) -> torch.Tensor:
        """(B, text_dim + visual_dim)；images 為 None 或 use_visual=False 時視覺槽為零向量"""
        h_s = self.backend.encode_texts(batch)
        if not use_text:
            h_s = torch.zeros_like(h_s)
        if images is None or not use_visual:
            h_v = torch.zeros(len(batch), self.backend.visual_dim, dtype=h_s.dtype)
        else:
            h_v = self.backend.encode_images(images.to(h_s.dtype))
        return fuse(h_s, h_v)

    def forward(self,
                batch: Sequence[Sequence[str]],
                images: Optional[torch.Tensor],
                use_text: bool = True,
                use_visual: bool = True) -> torch.Tensor:
        return self.head(self.fused(batch, images, use_text, use_visual))

    def probs(self, tokens: Sequence[str], image: Optional[torch.Tensor], use_text: bool = True) -> torch.Tensor:
        if not tokens:
            raise InputError("empty token sequence")
        images = image.unsqueeze(0) if image is not None else None
        return class_probs(self.fused([list(tokens)], images, use_text=use_text), self.head)[0]

    def predict(self, tokens: Sequence[str], image: Optional[torch.Tensor], use_text: bool = True) -> Prediction:
        return make_prediction(self.probs(tokens, image, use_text), self.labels)

    def class_loss(self,
                   batch: Sequence[Sequence[str]],
                   images: Optional[torch.Tensor],
                   golds: torch.Tensor,
                   use_text: bool = True,
                   use_visual: bool = True) -> torch.Tensor:
        return cross_entropy(self(batch, images, use_text, use_visual), golds)


def predict_event(tokens: Sequence[str], image: Optional[torch.Tensor], model: VFEventModel) -> str:
    """argmax_e P(e|s,v)，平手取最小標籤索引"""
    return model.predict(tokens, image).predicted


def class_loss(batch: Sequence[LabeledExample], model: VFEventModel) -> torch.Tensor:
    """−mean log P(gold|s,v)；缺圖片的項目使用零圖片"""
    if not batch:
        raise InputError("empty batch")
    resolution = model.resolution
    tokens = [list(item[0]) for item in batch]
    images = torch.stack([
        item[1] if item[1] is not None else torch.zeros(3, resolution, resolution, dtype=model.dtype)
        for item in batch
    ])
    golds = torch.tensor([model.label_index(item[2]) for item in batch], dtype=torch.long)
    return model.class_loss(tokens, images, golds)


def build_model(config: RunConfig,
                event_types: Sequence[str],
                texts: Sequence[str],
                seed: Optional[int] = None,
                dtype: torch.dtype = torch.float64,
                tokenizer: Optional[HashingTokenizer] = None) -> VFEventModel:
    """依設定建立並以種子初始化整個模型；字彙取自 texts（通常是 support 文字）"""
    seed = config.train.seed if seed is None else seed
    tokenizer = tokenizer or HashingTokenizer.build(texts, config.encoder.hash_buckets)
    resolution = config.data.resolution

    backend = create_backend(config.encoder, tokenizer, resolution, seed=derive_seed(seed, "encoder"), dtype=dtype)
    head = ClassifierHead(config.encoder.fused_dim, len(event_types) + 1).to(dtype)
    init_uniform_fan_in_(head, torch_generator(derive_seed(seed, "head")))
    imaginator = build_imaginator(config.imaginator, resolution, seed=derive_seed(seed, "imaginator"), dtype=dtype)

    model = VFEventModel(backend, head, imaginator, event_types)
    logger.info(
        f"Model built: {len(event_types)}+1 classes, vocab {len(tokenizer.vocab)}, "
        f"{sum(p.numel() for p in model.classifier_parameters())} classifier parameters"
    )
    return model
