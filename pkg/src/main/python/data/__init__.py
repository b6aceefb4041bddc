"""
資料模組

- load_dataset / validate_manifest: JSONL 清單載入與驗證
- load_image / save_image: 圖片與 [-1, 1] 張量互轉
- sample_episode: N+1-way K-shot episode 取樣
- ToyDatasetGenerator: 玩具資料集生成
"""

from .dataset import (
    NONE_LABEL,
    Dataset,
    Instance,
    ValidationIssue,
    ValidationReport,
    load_dataset,
    tokenize,
    validate_manifest,
    write_manifest,
)
from .images import check_image_array, load_image, load_images, save_image, zero_image
from .sampler import Episode, sample_episode
from .toy_data_generator import PRESETS, ToyClassSpec, ToyDatasetGenerator, class_means, generate_preset

__all__ = [
    "NONE_LABEL",
    "Dataset",
    "Instance",
    "ValidationIssue",
    "ValidationReport",
    "load_dataset",
    "tokenize",
    "validate_manifest",
    "write_manifest",
    "check_image_array",
    "load_image",
    "load_images",
    "save_image",
    "zero_image",
    "Episode",
    "sample_episode",
    "PRESETS",
    "ToyClassSpec",
    "ToyDatasetGenerator",
    "class_means",
    "generate_preset",
]
