"""
玩具資料生成器 - 建立可控的文字-圖片事件資料集

圖片是帶少量高斯雜訊的純色方塊，主色通道編碼類別；
文字由類別關鍵字加上與類別無關的填充詞組成
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np
from PIL import Image

from .dataset import NONE_LABEL, Instance, write_manifest

logger = logging.getLogger(__name__)

RED = (0.9, -0.9, -0.9)
GREEN = (-0.9, 0.9, -0.9)
BLUE = (-0.9, -0.9, 0.9)
DARK = (-0.9, -0.9, -0.9)

FILLERS = ["today", "reported", "city", "officials", "morning", "local", "news", "update"]


@dataclass(frozen=True)
class ToyClassSpec:
    """一個玩具類別：標籤、文字關鍵字、圖片顏色"""
    label: str
    keyword: str
    color: Tuple[float, float, float]


PRESETS: Dict[str, List[ToyClassSpec]] = {
    # 類別由主色通道決定，關鍵字直接點名類別
    "two_class_color": [
        ToyClassSpec("A", "crimson", RED),
        ToyClassSpec("B", "emerald", GREEN),
        ToyClassSpec(NONE_LABEL, "weather", DARK),
    ],
    # 標籤 = f(關鍵字, 顏色)；Attack / Die 共用關鍵字，只能靠圖片區分
    "joint_feature": [
        ToyClassSpec("Attack", "violence", RED),
        ToyClassSpec("Die", "violence", BLUE),
        ToyClassSpec("Meet", "meeting", RED),
        ToyClassSpec("Transport", "travel", BLUE),
        ToyClassSpec(NONE_LABEL, "weather", DARK),
    ],
}


class ToyDatasetGenerator:
    """玩具資料集生成器"""

    def __init__(self,
                 resolution: int = 4,
                 noise_std: float = 0.05,
                 fillers_per_text: int = 2,
                 seed: int = 0):
        self.resolution = resolution
        self.noise_std = noise_std
        self.fillers_per_text = fillers_per_text
        self.seed = seed

    def make_image(self, color: Sequence[float], rng: np.random.Generator) -> np.ndarray:
        """回傳 (R, R, 3) uint8 像素"""
        base = np.broadcast_to(np.asarray(color, dtype=np.float64), (self.resolution, self.resolution, 3))
        noisy = np.clip(base + rng.normal(0.0, self.noise_std, size=base.shape), -1.0, 1.0)
        return np.round((noisy + 1.0) / 2.0 * 255.0).astype(np.uint8)

    def make_text(self, keyword: str, rng: np.random.Generator) -> str:
        fillers = rng.choice(FILLERS, size=self.fillers_per_text, replace=True).tolist()
        return " ".join([keyword, *fillers])

    def generate(self,
                 out_dir: Path,
                 classes: Sequence[ToyClassSpec],
                 per_class: int = 40,
                 with_images: bool = True) -> Path:
        """寫出圖片、JSONL 清單與事件類型 sidecar，回傳清單路徑"""
        out_dir = Path(out_dir)
        image_dir = out_dir / "images"
        image_dir.mkdir(parents=True, exist_ok=True)
        rng = np.random.default_rng(self.seed)

        instances: List[Instance] = []
        for spec in classes:
            prefix = spec.label.lower()
            for i in range(per_class):
                record_id = f"{prefix}-{i:03d}"
                image_ref = None
                if with_images:
                    image_ref = f"images/{record_id}.png"
                    Image.fromarray(self.make_image(spec.color, rng)).save(out_dir / image_ref, format="PNG")
                instances.append(Instance(
                    id=record_id,
                    text=self.make_text(spec.keyword, rng),
                    label=spec.label,
                    image_ref=image_ref,
                ))

        event_types = [spec.label for spec in classes if spec.label != NONE_LABEL]
        manifest = write_manifest(instances, out_dir / "manifest.jsonl", event_types)
        logger.info(f"Generated {len(instances)} toy instances in {out_dir}")
        return manifest


def generate_preset(preset: str,
                    out_dir: Path,
                    per_class: int = 40,
                    resolution: int = 4,
                    seed: int = 0) -> Path:
    """依預設名稱生成資料集"""
    if preset not in PRESETS:
        raise ValueError(f"unknown toy preset '{preset}', choose from {sorted(PRESETS)}")
    generator = ToyDatasetGenerator(resolution=resolution, seed=seed)
    return generator.generate(out_dir, PRESETS[preset], per_class=per_class)


def class_means(preset: str) -> Dict[str, np.ndarray]:
    """每個標籤的理想通道平均值"""
    return {spec.label: np.asarray(spec.color) for spec in PRESETS[preset]}
