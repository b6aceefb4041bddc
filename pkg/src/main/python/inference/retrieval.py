"""
檢索池與餘弦相似度檢索

以文字對文字的相似度從 support 的 (文字, 圖片) 中挑圖：
argmax cos(encode_text(s), encode_text(pool 文字))，平手取最小索引
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import torch

from ..classifier.model import VFEventModel
from ..core.exceptions import ConfigurationError, InputError
from ..data.dataset import Instance

logger = logging.getLogger(__name__)


def cosine_scores(query: np.ndarray, pool: np.ndarray) -> np.ndarray:
    """query (D,) 對 pool (P, D) 的餘弦相似度；零向量的相似度為 0"""
    query = np.asarray(query, dtype=np.float64)
    pool = np.asarray(pool, dtype=np.float64)
    q_norm = np.linalg.norm(query)
    p_norm = np.linalg.norm(pool, axis=1)
    denom = q_norm * p_norm
    dots = pool @ query
    return np.divide(dots, denom, out=np.zeros_like(dots), where=denom > 0)


def rank_by_cosine(query: np.ndarray, pool: np.ndarray) -> int:
    """最相似的索引；np.argmax 在平手時回傳最小索引"""
    if len(pool) == 0:
        raise ConfigurationError("retrieval pool is empty")
    return int(np.argmax(cosine_scores(query, pool)))


@dataclass
class RetrievalPool:
    """(Instance, 圖片) 檢索池"""
    instances: List[Instance]
    images: torch.Tensor
    _cache: Dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.images is not None and len(self.instances) != len(self.images):
            raise InputError(f"{len(self.instances)} pool texts for {len(self.images)} pool images")

    def __len__(self) -> int:
        return len(self.instances)

    @classmethod
    def empty(cls) -> "RetrievalPool":
        return cls(instances=[], images=torch.zeros(0, 3, 1, 1))

    def embeddings(self, model: VFEventModel) -> np.ndarray:
        """逐筆編碼池中文字（與查詢相同路徑），依模型快取"""
        key = id(model)
        if key not in self._cache:
            was_training = model.training
            model.eval()
            with torch.no_grad():
                rows = [model.backend.encode_texts([i.tokens])[0].double().numpy() for i in self.instances]
            model.train(was_training)
            self._cache[key] = np.stack(rows) if rows else np.zeros((0, model.backend.text_dim))
        return self._cache[key]


def retrieve_image(tokens: Sequence[str], pool: RetrievalPool, model: VFEventModel) -> torch.Tensor:
    """回傳與查詢文字餘弦相似度最高的池中圖片"""
    if len(pool) == 0:
        raise ConfigurationError("retrieve mode needs a non-empty retrieval pool")
    if not tokens:
        raise InputError("empty token sequence")
    with torch.no_grad():
        query = model.backend.encode_texts([list(tokens)])[0].double().numpy()
    index = rank_by_cosine(query, pool.embeddings(model))
    logger.debug(f"Retrieved pool item {pool.instances[index].id}")
    return pool.images[index]
