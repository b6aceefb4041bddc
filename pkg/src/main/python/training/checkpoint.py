"""
統一 checkpoint 格式

zip 封存檔：manifest.json（格式版本、排程描述、ω、trainable_mask、字彙、
事件類型、設定）＋每個參數一個 .npy；成員時間戳固定，相同模型產生相同位元組
"""

import io
import json
import logging
import zipfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import torch

from ..classifier.model import VFEventModel, build_model
from ..core.config import RunConfig
from ..core.exceptions import CheckpointError, ParameterError
from ..core.seeding import resolve_dtype
from ..data.dataset import Instance
from ..encoders.tokenizer import HashingTokenizer
from ..imaginator.schedule import schedule_from_descriptor

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
SECTIONS = ("backend", "head", "imaginator")
_FIXED_DATE = (1980, 1, 1, 0, 0, 0)


@dataclass
class LoadedCheckpoint:
    """讀回的 checkpoint 內容"""
    model: VFEventModel
    config: RunConfig
    manifest: Dict[str, Any]
    pool_instances: List[Instance] = field(default_factory=list)
    pool_images: Optional[torch.Tensor] = None


def _write_member(archive: zipfile.ZipFile, name: str, payload: bytes) -> None:
    info = zipfile.ZipInfo(name, date_time=_FIXED_DATE)
    info.compress_type = zipfile.ZIP_DEFLATED
    info.external_attr = 0o644 << 16
    archive.writestr(info, payload)


def _npy_bytes(array: np.ndarray) -> bytes:
    buffer = io.BytesIO()
    np.lib.format.write_array(buffer, np.ascontiguousarray(array), allow_pickle=False)
    return buffer.getvalue()


def _read_npy(archive: zipfile.ZipFile, name: str) -> np.ndarray:
    with archive.open(name) as f:
        return np.lib.format.read_array(io.BytesIO(f.read()), allow_pickle=False)


def save_checkpoint(model: VFEventModel,
                    path: Path,
                    config: RunConfig,
                    pool_instances: Sequence[Instance] = (),
                    pool_images: Optional[torch.Tensor] = None) -> Path:
    """寫出模型 checkpoint；pool 為 retrieve 模式使用的 (文字, 圖片) 集合"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    sections: Dict[str, List[str]] = {}
    arrays: Dict[str, np.ndarray] = {}
    for section in SECTIONS:
        state = getattr(model, section).state_dict()
        sections[section] = list(state.keys())
        for name, tensor in state.items():
            arrays[f"arrays/{section}/{name}.npy"] = tensor.detach().cpu().numpy()

    pool = None
    if pool_instances:
        pool = {"instances": [i.to_dict() for i in pool_instances]}
        if pool_images is not None:
            arrays["arrays/pool/images.npy"] = pool_images.detach().cpu().numpy()

    manifest = {
        "format_version": FORMAT_VERSION,
        "event_types": list(model.event_types),
        "tokenizer": model.tokenizer.to_dict(),
        "imaginator": model.imaginator.descriptor(),
        "trainable_mask": dict(sorted(model.imaginator.trainable_mask.items())),
        "sections": sections,
        "config": config.model_section(),
        "retrieval_pool": pool,
    }

    with zipfile.ZipFile(path, "w") as archive:
        _write_member(archive, "manifest.json", json.dumps(manifest, indent=2, sort_keys=True).encode("utf-8"))
        for name in sorted(arrays):
            _write_member(archive, name, _npy_bytes(arrays[name]))

    logger.info(f"Checkpoint saved to {path}")
    return path


def read_manifest(path: Path) -> Dict[str, Any]:
    try:
        with zipfile.ZipFile(path, "r") as archive:
            return json.loads(archive.read("manifest.json").decode("utf-8"))
    except (OSError, KeyError, zipfile.BadZipFile, json.JSONDecodeError) as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e


def _restore_imaginator_descriptor(model: VFEventModel, manifest: Dict[str, Any]) -> None:
    """排程與 ω 以 manifest 記錄為準；與設定重建的結構不一致時視為損毀"""
    try:
        recorded = manifest["imaginator"]
        schedule = schedule_from_descriptor(recorded["schedule"])
        omega = float(recorded["omega"])
    except (KeyError, TypeError, ValueError, ParameterError) as e:
        raise CheckpointError(f"invalid imaginator descriptor in checkpoint: {e}") from e
    expected = model.imaginator.schedule.descriptor()
    if schedule.descriptor() != expected:
        raise CheckpointError(f"schedule {schedule.descriptor()} in checkpoint does not match config {expected}")
    model.imaginator.schedule = schedule
    model.imaginator.omega = omega


def load_checkpoint(path: Path, config: Optional[RunConfig] = None) -> LoadedCheckpoint:
    """重建模型並載入參數；config 為 None 時使用 checkpoint 內記錄的設定"""
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    manifest = read_manifest(path)
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint format version {version} (expected {FORMAT_VERSION})")

    stored = RunConfig.model_validate(manifest["config"])
    # 權重已包含預訓練結果，不再重複初始化或預訓練
    imaginator_config = stored.imaginator.model_copy(update={"init_checkpoint": None, "pretrain_steps": 0})
    if config is None:
        config = stored.model_copy(update={"imaginator": imaginator_config})
    else:
        # 模型結構以 checkpoint 為準
        config = config.model_copy(update={
            "data": config.data.model_copy(update={"resolution": stored.data.resolution}),
            "encoder": stored.encoder,
            "imaginator": imaginator_config,
        })

    dtype = resolve_dtype(stored.train.precision)
    tokenizer = HashingTokenizer.from_dict(manifest["tokenizer"])
    model = build_model(config, manifest["event_types"], texts=[], seed=0, dtype=dtype, tokenizer=tokenizer)
    _restore_imaginator_descriptor(model, manifest)

    try:
        with zipfile.ZipFile(path, "r") as archive:
            for section, names in manifest["sections"].items():
                state = {
                    name: torch.from_numpy(_read_npy(archive, f"arrays/{section}/{name}.npy"))
                    for name in names
                }
                getattr(model, section).load_state_dict(state)
            pool_images = None
            if "arrays/pool/images.npy" in archive.namelist():
                pool_images = torch.from_numpy(_read_npy(archive, "arrays/pool/images.npy"))
    except (KeyError, RuntimeError, ValueError, zipfile.BadZipFile) as e:
        raise CheckpointError(f"corrupt checkpoint {path}: {e}") from e

    mask = manifest["trainable_mask"]
    model.imaginator.trainable_mask = dict(mask)
    for name, param in model.imaginator.named_parameters():
        param.requires_grad_(bool(mask.get(name, False)))

    pool = manifest.get("retrieval_pool") or {}
    pool_instances = [
        Instance(id=r["id"], text=r["text"], label=r["event_type"], image_ref=r.get("image"))
        for r in pool.get("instances", [])
    ]
    model.eval()
    logger.info(f"Checkpoint loaded from {path}")
    return LoadedCheckpoint(model, config, manifest, pool_instances, pool_images)
