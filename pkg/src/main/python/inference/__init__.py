"""
推論模組

- VisualMode: actual / imagine / retrieve / zero / textonly / visualonly
- RetrievalPool / retrieve_image: 文字餘弦相似度檢索
- resolve_visual_context / infer / infer_batch: 純文字查詢推論
- PredictionRecord: JSONL 預測輸出
"""

from .modes import VisualMode
from .predictor import infer, infer_batch, query_seed, resolve_visual_context
from .records import PredictionRecord, read_predictions, write_predictions
from .retrieval import RetrievalPool, cosine_scores, rank_by_cosine, retrieve_image

__all__ = [
    "VisualMode",
    "infer",
    "infer_batch",
    "query_seed",
    "resolve_visual_context",
    "PredictionRecord",
    "read_predictions",
    "write_predictions",
    "RetrievalPool",
    "cosine_scores",
    "rank_by_cosine",
    "retrieve_image",
]
