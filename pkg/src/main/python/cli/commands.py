"""
命令列子命令實作

每個 cmd_* 接收已解析完成的 RunConfig，回傳結束碼（0 成功、1 使用者錯誤、
2 內部或數值錯誤），並在輸出目錄寫出 provenance_<command>.json
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from ..classifier.model import VFEventModel
from ..core.config import RunConfig
from ..core.exceptions import ConfigurationError, InputError, TrainingError
from ..core.seeding import resolve_dtype
from ..data.dataset import Dataset, load_dataset, tokenize, validate_manifest
from ..data.images import save_image
from ..data.sampler import Episode, sample_episode
from ..data.toy_data_generator import PRESETS, generate_preset
from ..evaluation.experiment import ExperimentRunner, write_results
from ..inference.modes import VisualMode
from ..inference.predictor import infer_batch
from ..inference.records import PredictionRecord, write_predictions
from ..inference.retrieval import RetrievalPool
from ..training.checkpoint import LoadedCheckpoint, load_checkpoint, save_checkpoint
from ..training.trainer import Trainer, load_support_images, support_pool

logger = logging.getLogger(__name__)

CHECKPOINT_NAME = "model.vfe"
TRAIN_LOG_NAME = "train_log.csv"
PREDICTIONS_NAME = "predictions.jsonl"


def write_provenance(config: RunConfig, command: str, arguments: Dict[str, Any]) -> Path:
    """寫出完整解析後的設定，單憑此檔即可重建一次執行"""
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"provenance_{command}.json"
    payload = {
        "command": command,
        "arguments": {k: v for k, v in sorted(arguments.items())},
        "config": config.model_dump(mode="json"),
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, ensure_ascii=False, sort_keys=True)
    return path


def _require_dataset(config: RunConfig) -> str:
    if not config.data.dataset_path:
        raise ConfigurationError("data.dataset_path is not set (use --dataset or the config file)")
    return config.data.dataset_path


def _load(config: RunConfig, check_images: bool = True) -> Dataset:
    config.check_paths()
    return load_dataset(
        _require_dataset(config),
        image_root=config.data.image_root,
        labels_path=config.data.labels_path,
        check_images=check_images,
    )


def _episode(dataset: Dataset, config: RunConfig) -> Episode:
    n_ways = min(config.train.n_ways, len(dataset.event_types))
    if n_ways < config.train.n_ways:
        logger.warning(f"n_ways={config.train.n_ways} exceeds the dataset's {n_ways} event types; using all")
    return sample_episode(
        dataset,
        n_ways,
        config.train.k_shots,
        config.train.seed,
        queries_per_label=config.eval.queries_per_label,
    )


def _checkpoint(path: Optional[str], config: RunConfig) -> LoadedCheckpoint:
    if not path:
        raise ConfigurationError("--checkpoint is required for this command")
    return load_checkpoint(Path(path), config)


def _pool(loaded: LoadedCheckpoint) -> RetrievalPool:
    if loaded.pool_instances and loaded.pool_images is not None:
        return RetrievalPool(loaded.pool_instances, loaded.pool_images)
    return RetrievalPool.empty()


def cmd_validate(config: RunConfig) -> int:
    """檢查清單結構、圖片可解碼性與標籤一致性"""
    write_provenance(config, "validate", {})
    report = validate_manifest(_require_dataset(config), config.data.image_root, config.data.labels_path)

    print(f"🔍 {report.path}")
    for issue in report.issues:
        print(f"   ❌ {issue}")
    print(f"{'✅' if report.ok else '❌'} {report.summary()}")
    return 0 if report.ok else 1


def cmd_train(config: RunConfig) -> int:
    """抽樣 episode、訓練，寫出 checkpoint 與訓練紀錄"""
    write_provenance(config, "train", {})
    out_dir = Path(config.output_dir)
    dataset = _load(config)
    episode = _episode(dataset, config)
    dtype = resolve_dtype(config.train.precision)

    print(f"🚀 Training {episode.n_ways}+1-way {episode.k_shots}-shot, mode={config.train.mode}, seed={config.train.seed}")
    images = load_support_images(episode, config, dtype)
    trainer = Trainer(config, checkpoint_dir=out_dir / "checkpoints")
    try:
        model, log = trainer.train(episode, images=images)
    except TrainingError as e:
        if e.log is not None:
            e.log.export_csv(out_dir / TRAIN_LOG_NAME)
            print(f"📄 Partial training log: {out_dir / TRAIN_LOG_NAME}")
        raise

    pool_instances, pool_images = support_pool(episode, images)
    checkpoint = save_checkpoint(model, out_dir / CHECKPOINT_NAME, config, pool_instances, pool_images)
    log.final_checkpoint = str(checkpoint)
    log.export_csv(out_dir / TRAIN_LOG_NAME)

    print("🎉 Training finished")
    for stage, summary in log.get_summary().items():
        if isinstance(summary, dict):
            values = ", ".join(f"{k}={v:.6f}" if isinstance(v, float) else f"{k}={v}" for k, v in summary.items())
            print(f"   📊 {stage}: {values}")
    print(f"   💾 checkpoint: {checkpoint}")
    print(f"   📄 train log: {out_dir / TRAIN_LOG_NAME}")
    return 0


def cmd_imagine(config: RunConfig, checkpoint: Optional[str], text: Optional[str], png: Optional[str] = None) -> int:
    """以 checkpoint 中的 Imaginator 為文字合成圖片並存成 PNG"""
    seed = config.train.seed
    tokens = tokenize(text or "")
    if not tokens:
        raise InputError("empty text: nothing to imagine")

    loaded = _checkpoint(checkpoint, config)
    write_provenance(loaded.config, "imagine", {"checkpoint": checkpoint, "text": text, "png": png})
    image = loaded.model.imaginator.synthesize(tokens, seed=seed)
    path = Path(png) if png else Path(config.output_dir) / f"imagined_seed{seed}.png"
    save_image(image, path)
    print(str(path))
    return 0


def cmd_infer(config: RunConfig, checkpoint: Optional[str], mode: Optional[str] = None) -> int:
    """對清單中的每筆查詢推論，寫出 JSONL 預測"""
    mode = VisualMode(mode or config.eval.modes[0])
    loaded = _checkpoint(checkpoint, config)
    write_provenance(loaded.config, "infer", {"checkpoint": checkpoint, "mode": mode.value})
    dataset = _load(loaded.config, check_images=mode.needs_query_image)

    predictions = infer_batch(
        dataset.instances,
        mode,
        loaded.model,
        seed=config.train.seed,
        pool=_pool(loaded),
        image_root=dataset.image_root,
        workers=config.eval.workers,
    )
    records = [
        PredictionRecord.from_prediction(q.id, p, mode.value)
        for q, p in zip(dataset.instances, predictions)
    ]
    path = write_predictions(records, Path(config.output_dir) / PREDICTIONS_NAME)
    print(f"✅ {len(records)} predictions written to {path}")
    return 0


def cmd_eval(config: RunConfig, checkpoint: Optional[str] = None) -> int:
    """執行 K-shot × 模式 × 種子網格並寫出報告；任一格失敗時結束碼為 1"""
    init_model: Optional[VFEventModel] = None
    if checkpoint:
        loaded = _checkpoint(checkpoint, config)
        init_model, config = loaded.model, loaded.config
    write_provenance(config, "eval", {"checkpoint": checkpoint})
    dataset = _load(config)

    result = ExperimentRunner(config, dataset, init_model, progress=True).run()
    paths = write_results(result, config, Path(config.output_dir))

    frame = result.to_dataframe()[["shots", "mode", "seed", "macro_f1", "macro_p", "macro_r", "error"]]
    print(frame.to_string(index=False))
    print(f"📄 results: {paths['results']}")
    print(f"📄 summary: {paths['summary']}")
    if result.failed:
        print(f"❌ {len(result.failed)} of {len(result.cells)} cells failed")
        return 1
    return 0


def cmd_make_toy(config: RunConfig, preset: str, per_class: int = 40) -> int:
    """生成玩具資料集到輸出目錄"""
    if preset not in PRESETS:
        raise ConfigurationError(f"unknown toy preset '{preset}', choose from {sorted(PRESETS)}")
    write_provenance(config, "make-toy", {"preset": preset, "per_class": per_class})
    manifest = generate_preset(
        preset,
        Path(config.output_dir),
        per_class=per_class,
        resolution=config.data.resolution,
        seed=config.train.seed,
    )
    print(f"✅ Toy dataset '{preset}' written to {manifest}")
    return 0


COMMANDS: List[str] = ["validate", "train", "imagine", "infer", "eval", "make-toy"]
