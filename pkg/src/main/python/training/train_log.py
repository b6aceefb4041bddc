"""
訓練紀錄收集器

每一步記錄 (step, stage, class_loss, visual_loss, combined_loss)，
步數全域單調遞增，可匯出成 CSV
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from ..core.exceptions import TrainingError

COLUMNS = ["step", "stage", "epoch", "class_loss", "visual_loss", "combined_loss"]


@dataclass
class StepRecord:
    """單步損失"""
    step: int
    stage: str
    epoch: int
    class_loss: Optional[float] = None
    visual_loss: Optional[float] = None
    combined_loss: Optional[float] = None


@dataclass
class TrainLog:
    """訓練紀錄"""
    records: List[StepRecord] = field(default_factory=list)
    final_checkpoint: Optional[str] = None

    def __post_init__(self):
        self.logger = logging.getLogger(f"{__name__}.TrainLog")

    @property
    def next_step(self) -> int:
        return self.records[-1].step + 1 if self.records else 0

    def record(self,
               stage: str,
               epoch: int = 0,
               class_loss: Optional[float] = None,
               visual_loss: Optional[float] = None,
               combined_loss: Optional[float] = None) -> StepRecord:
        """記錄一步；任何非有限損失都視為發散"""
        entry = StepRecord(
            step=self.next_step,
            stage=stage,
            epoch=epoch,
            class_loss=class_loss,
            visual_loss=visual_loss,
            combined_loss=combined_loss,
        )
        for name in ("class_loss", "visual_loss", "combined_loss"):
            value = getattr(entry, name)
            if value is not None and not math.isfinite(value):
                raise TrainingError(f"{stage}: {name} is {value}", step=entry.step, log=self)
        self.records.append(entry)
        self.logger.debug(f"step {entry.step} [{stage}] {asdict(entry)}")
        return entry

    def stage_records(self, stage: str) -> List[StepRecord]:
        return [r for r in self.records if r.stage == stage]

    def epoch_mean(self, stage: str, epoch: int, column: str = "class_loss") -> float:
        values = [getattr(r, column) for r in self.stage_records(stage) if r.epoch == epoch]
        values = [v for v in values if v is not None]
        return sum(values) / len(values) if values else float("nan")

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(r) for r in self.records], columns=COLUMNS)

    def export_csv(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_dataframe().to_csv(path, index=False)
        return path

    def get_summary(self) -> Dict[str, Any]:
        """各階段首末損失摘要"""
        summary: Dict[str, Any] = {"steps": len(self.records), "final_checkpoint": self.final_checkpoint}
        for stage in dict.fromkeys(r.stage for r in self.records):
            rows = self.stage_records(stage)
            column = "visual_loss" if stage in ("pretrain", "customize") else "class_loss"
            summary[stage] = {
                "steps": len(rows),
                f"first_{column}": getattr(rows[0], column),
                f"last_{column}": getattr(rows[-1], column),
            }
        return summary
