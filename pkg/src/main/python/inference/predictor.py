"""
純文字查詢推論

先依模式取得視覺情境，再跑融合分類器；每個查詢的合成雜訊種子由
(全域種子, 查詢 id) 穩定衍生，結果與處理順序無關
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Union

import torch

from ..classifier.head import Prediction
from ..classifier.model import VFEventModel
from ..core.exceptions import ConfigurationError
from ..core.seeding import derive_seed
from ..data.dataset import Instance
from ..data.images import load_image, zero_image
from .modes import VisualMode
from .retrieval import RetrievalPool, retrieve_image

logger = logging.getLogger(__name__)


def query_seed(global_seed: int, query_id: str) -> int:
    return derive_seed(global_seed, "query", query_id)


def _query_image_path(query: Instance, image_root: Optional[Path]) -> Path:
    ref = Path(query.image_ref)
    if ref.is_absolute() or image_root is None:
        return ref
    return Path(image_root) / ref


def resolve_visual_context(query: Instance,
                           mode: Union[VisualMode, str],
                           model: VFEventModel,
                           pool: Optional[RetrievalPool] = None,
                           seed: int = 0,
                           image_root: Optional[Path] = None) -> Optional[torch.Tensor]:
    """回傳 (3, R, R) 圖片；textonly 回傳 None（視覺嵌入槽為零向量）"""
    mode = VisualMode(mode)
    resolution = model.resolution

    if mode.needs_query_image:
        if query.image_ref is None:
            raise ConfigurationError(f"mode '{mode.value}' needs an image but query {query.id} has none")
        return load_image(_query_image_path(query, image_root), resolution, model.dtype)
    if mode is VisualMode.IMAGINE:
        return model.imaginator.synthesize(query.tokens, seed=query_seed(seed, query.id))
    if mode is VisualMode.RETRIEVE:
        if pool is None or len(pool) == 0:
            raise ConfigurationError("retrieve mode needs a non-empty retrieval pool")
        return retrieve_image(query.tokens, pool, model)
    if mode is VisualMode.ZERO:
        return zero_image(resolution, model.dtype)
    return None


@torch.no_grad()
def infer(query: Instance,
          mode: Union[VisualMode, str],
          model: VFEventModel,
          seed: int = 0,
          pool: Optional[RetrievalPool] = None,
          image_root: Optional[Path] = None) -> Prediction:
    """對單一查詢預測事件類型"""
    mode = VisualMode(mode)
    model.eval()
    image = resolve_visual_context(query, mode, model, pool, seed, image_root)
    return model.predict(query.tokens, image, use_text=mode is not VisualMode.VISUALONLY)


def infer_batch(queries: Sequence[Instance],
                mode: Union[VisualMode, str],
                model: VFEventModel,
                seed: int = 0,
                pool: Optional[RetrievalPool] = None,
                image_root: Optional[Path] = None,
                workers: int = 1) -> List[Prediction]:
    """批次推論；輸出順序與輸入一致"""
    mode = VisualMode(mode)
    model.eval()
    if mode is VisualMode.RETRIEVE and pool is not None and len(pool):
        pool.embeddings(model)

    def _one(query: Instance) -> Prediction:
        return infer(query, mode, model, seed, pool, image_root)

    if workers <= 1:
        predictions = [_one(q) for q in queries]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            predictions = list(executor.map(_one, queries))
    logger.info(f"Inferred {len(predictions)} queries with mode '{mode.value}'")
    return predictions
