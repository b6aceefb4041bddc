"""
K-shot 實驗網格

對每個 (K, seed) 取樣 episode 並訓練一次，再以每個視覺模式推論 queries；
結果依 (K, mode, seed) 排序寫成 results.csv / summary.csv / results.json。
單一格失敗只標記錯誤，其餘格照常執行
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd
from tqdm import tqdm

from ..classifier.model import VFEventModel, build_model
from ..core.config import RunConfig
from ..core.exceptions import VFEventError
from ..core.seeding import resolve_dtype
from ..data.dataset import Dataset
from ..data.sampler import Episode, sample_episode
from ..inference.modes import VisualMode
from ..inference.predictor import infer_batch
from ..inference.retrieval import RetrievalPool
from ..training.trainer import Trainer, load_support_images, support_pool
from .metrics import MetricsReport, aggregate_reports, evaluate_predictions

logger = logging.getLogger(__name__)

BASE_COLUMNS = ["shots", "mode", "seed", "macro_f1", "macro_p", "macro_r"]


@dataclass
class CellResult:
    """一格 (K, mode, seed) 的結果；失敗時 report 為 None"""
    shots: int
    mode: str
    seed: int
    report: Optional[MetricsReport] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_row(self) -> Dict[str, Any]:
        if self.report is not None:
            row = self.report.to_row()
        else:
            row = {"shots": self.shots, "mode": self.mode, "seed": self.seed,
                   "macro_f1": math.nan, "macro_p": math.nan, "macro_r": math.nan}
        row["error"] = self.error or ""
        return row


@dataclass
class ExperimentResult:
    cells: List[CellResult] = field(default_factory=list)
    labels: List[str] = field(default_factory=list)

    @property
    def reports(self) -> List[MetricsReport]:
        return [c.report for c in self.cells if c.report is not None]

    @property
    def failed(self) -> List[CellResult]:
        return [c for c in self.cells if not c.ok]

    def to_dataframe(self) -> pd.DataFrame:
        per_class = [f"{label}_{metric}" for label in self.labels for metric in ("f1", "p", "r")]
        return pd.DataFrame([c.to_row() for c in self.cells], columns=[*BASE_COLUMNS, *per_class, "error"])


class ExperimentRunner:
    """實驗網格管理器"""

    def __init__(self,
                 config: RunConfig,
                 dataset: Dataset,
                 init_model: Optional[VFEventModel] = None,
                 progress: bool = False):
        self.config = config
        self.dataset = dataset
        self.init_model = init_model
        self.progress = progress
        self.dtype = resolve_dtype(config.train.precision)
        self.logger = logging.getLogger(f"{__name__}.ExperimentRunner")

        self.n_ways = config.train.n_ways
        if self.n_ways > len(dataset.event_types):
            self.logger.warning(
                f"n_ways={self.n_ways} exceeds the {len(dataset.event_types)} event types in the dataset; using all"
            )
            self.n_ways = len(dataset.event_types)

    def _cell_config(self, shots: int, seed: int) -> RunConfig:
        train = self.config.train.model_copy(update={"k_shots": shots, "seed": seed})
        return self.config.model_copy(update={"train": train})

    def _init_for(self, episode: Episode, config: RunConfig) -> Optional[VFEventModel]:
        """事件類型相同時沿用整個初始模型，否則只沿用其 Imaginator"""
        if self.init_model is None:
            return None
        if list(self.init_model.event_types) == list(episode.event_types):
            return self.init_model
        model = build_model(config, episode.event_types, texts=[i.text for i in episode.support], dtype=self.dtype)
        model.imaginator.load_state_dict(self.init_model.imaginator.state_dict())
        return model

    def _evaluate(self,
                  model: VFEventModel,
                  episode: Episode,
                  pool: RetrievalPool,
                  mode: str,
                  shots: int,
                  seed: int) -> MetricsReport:
        predictions = infer_batch(
            episode.queries,
            mode,
            model,
            seed=seed,
            pool=pool,
            image_root=self.dataset.image_root,
            workers=self.config.eval.workers,
        )
        return evaluate_predictions(
            [p.predicted for p in predictions],
            [q.label for q in episode.queries],
            episode.labels,
            include_none=self.config.eval.include_none,
            shots=shots,
            mode=mode,
            seed=seed,
        )

    def _run_cell(self, shots: int, seed: int, modes: Sequence[str]) -> List[CellResult]:
        config = self._cell_config(shots, seed)
        try:
            episode = sample_episode(
                self.dataset,
                self.n_ways,
                shots,
                seed,
                queries_per_label=config.eval.queries_per_label,
            )
            images = load_support_images(episode, config, self.dtype)
            model, _ = Trainer(config).train(episode, self._init_for(episode, config), images)
            pool_instances, pool_images = support_pool(episode, images)
            pool = RetrievalPool(pool_instances, pool_images) if pool_instances else RetrievalPool.empty()
        except (VFEventError, RuntimeError, ValueError) as e:
            self.logger.error(f"❌ K={shots} seed={seed} training failed: {e}", exc_info=True)
            return [CellResult(shots, mode, seed, error=f"{type(e).__name__}: {e}") for mode in modes]

        results = []
        for mode in modes:
            try:
                report = self._evaluate(model, episode, pool, mode, shots, seed)
                self.logger.info(f"✅ K={shots} mode={mode} seed={seed} macro_f1={report.macro_f1:.4f}")
                results.append(CellResult(shots, mode, seed, report=report))
            except (VFEventError, RuntimeError, ValueError) as e:
                self.logger.error(f"❌ K={shots} mode={mode} seed={seed} failed: {e}", exc_info=True)
                results.append(CellResult(shots, mode, seed, error=f"{type(e).__name__}: {e}"))
        return results

    def run(self,
            shots: Optional[Sequence[int]] = None,
            modes: Optional[Sequence[str]] = None,
            seeds: Optional[Sequence[int]] = None) -> ExperimentResult:
        shots = list(shots or self.config.eval.shots)
        modes = [VisualMode(m).value for m in (modes or self.config.eval.modes)]
        seeds = list(seeds if seeds is not None else self.config.eval.seeds)
        self.logger.info(f"🚀 Experiment grid: shots={shots} modes={modes} seeds={seeds}")

        by_key: Dict[tuple, CellResult] = {}
        grid = [(k, s) for k in shots for s in seeds]
        for k, s in tqdm(grid, desc="cells", disable=not self.progress):
            for cell in self._run_cell(k, s, modes):
                by_key[(cell.shots, cell.mode, cell.seed)] = cell

        ordered = [by_key[(k, m, s)] for k in shots for m in modes for s in seeds]
        result = ExperimentResult(cells=ordered, labels=self.dataset.labels)
        self.logger.info(f"🎉 Experiment finished: {len(ordered)} cells, {len(result.failed)} failed")
        return result


def write_results(result: ExperimentResult, config: RunConfig, out_dir: Path) -> Dict[str, Path]:
    """寫出 results.csv、summary.csv 與附完整設定的 results.json"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "results": out_dir / "results.csv",
        "summary": out_dir / "summary.csv",
        "json": out_dir / "results.json",
    }
    result.to_dataframe().to_csv(paths["results"], index=False)
    aggregate_reports(result.reports).to_csv(paths["summary"], index=False)
    payload = {
        "config": config.model_dump(mode="json"),
        "cells": [
            {**(c.report.to_dict() if c.report else {"shots": c.shots, "mode": c.mode, "seed": c.seed}),
             "error": c.error}
            for c in result.cells
        ],
        "failed": len(result.failed),
    }
    with open(paths["json"], "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, ensure_ascii=False, sort_keys=True)
    return paths


def run_experiment(dataset: Dataset,
                   shots: Sequence[int],
                   modes: Sequence[str],
                   seeds: Sequence[int],
                   config: RunConfig,
                   init_model: Optional[VFEventModel] = None,
                   out_dir: Optional[Path] = None) -> List[MetricsReport]:
    """執行網格並回傳成功格的報告（依 (K, mode, seed) 排序）"""
    result = ExperimentRunner(config, dataset, init_model).run(shots, modes, seeds)
    if out_dir is not None:
        write_results(result, config, out_dir)
    return result.reports
