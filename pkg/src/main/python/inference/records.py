"""
預測輸出資料模型

JSONL 每行：{id, predicted, probs, mode}
"""

from pathlib import Path
from typing import Dict, List, Sequence

from pydantic import BaseModel, Field, field_validator

from ..classifier.head import Prediction


class PredictionRecord(BaseModel):
    """單筆預測輸出"""
    id: str = Field(..., description="查詢 id")
    predicted: str = Field(..., description="預測事件類型")
    probs: Dict[str, float] = Field(..., description="各標籤機率")
    mode: str = Field(..., description="視覺情境模式")

    @field_validator("probs")
    @classmethod
    def validate_probs(cls, v: Dict[str, float]) -> Dict[str, float]:
        if any(p < 0.0 or p > 1.0 for p in v.values()):
            raise ValueError("probabilities must lie in [0, 1]")
        if v and abs(sum(v.values()) - 1.0) > 1e-6:
            raise ValueError("probabilities must sum to 1")
        return v

    @classmethod
    def from_prediction(cls, query_id: str, prediction: Prediction, mode: str) -> "PredictionRecord":
        return cls(
            id=query_id,
            predicted=prediction.predicted,
            probs=dict(zip(prediction.labels, prediction.probs)),
            mode=mode,
        )


def write_predictions(records: Sequence[PredictionRecord], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(record.model_dump_json() + "\n")
    return path


def read_predictions(path: Path) -> List[PredictionRecord]:
    with open(path, "r", encoding="utf-8") as f:
        return [PredictionRecord.model_validate_json(line) for line in f if line.strip()]
