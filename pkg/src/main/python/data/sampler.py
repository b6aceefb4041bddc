"""
N+1-way K-shot episode 取樣

none 類別視為第 N+1 個標籤；同一標籤內不放回抽樣，
結果僅由 (資料集內容, n_ways, k_shots, seed) 決定
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from ..core.exceptions import SamplingError
from .dataset import NONE_LABEL, Dataset, Instance

logger = logging.getLogger(__name__)


@dataclass
class Episode:
    """一個 few-shot episode：support 依標籤分組，其餘為 queries"""
    support: List[Instance]
    queries: List[Instance]
    n_ways: int
    k_shots: int
    seed: int
    event_types: List[str]
    image_root: Optional[Path] = None

    @property
    def labels(self) -> List[str]:
        return [*self.event_types, NONE_LABEL]

    def label_index(self, label: str) -> int:
        return self.labels.index(label)

    def support_by_label(self) -> Dict[str, List[Instance]]:
        groups: Dict[str, List[Instance]] = {label: [] for label in self.labels}
        for instance in self.support:
            groups[instance.label].append(instance)
        return groups

    def resolve_image(self, instance: Instance) -> Optional[Path]:
        if instance.image_ref is None:
            return None
        ref = Path(instance.image_ref)
        if ref.is_absolute() or self.image_root is None:
            return ref
        return self.image_root / ref

    def summary(self) -> Dict[str, int]:
        return {
            "n_ways": self.n_ways,
            "k_shots": self.k_shots,
            "support": len(self.support),
            "queries": len(self.queries),
            "seed": self.seed,
        }


def sample_episode(dataset: Dataset,
                   n_ways: int,
                   k_shots: int,
                   seed: int,
                   require_images: bool = True,
                   queries_per_label: Optional[int] = None) -> Episode:
    """抽取 (n_ways+1)·k_shots 筆 support

    n_ways 小於資料集事件類型數時，以 seed 隨機挑選事件類型（保持標準順序）。
    require_images 為 True 時，事件類型的 support 只從帶圖片的句子中抽取；
    none 類別可無圖片（訓練時以零圖片代替）。
    """
    if k_shots < 1:
        raise SamplingError(f"k_shots must be >= 1, got {k_shots}")
    if n_ways < 1 or n_ways > len(dataset.event_types):
        raise SamplingError(f"n_ways must be in [1, {len(dataset.event_types)}], got {n_ways}")

    rng = np.random.default_rng(seed)

    if n_ways == len(dataset.event_types):
        selected = list(dataset.event_types)
    else:
        picked = sorted(rng.choice(len(dataset.event_types), size=n_ways, replace=False).tolist())
        selected = [dataset.event_types[i] for i in picked]

    groups = dataset.by_label()
    support: List[Instance] = []
    chosen_ids = set()
    for label in [*selected, NONE_LABEL]:
        candidates = groups[label]
        if require_images and label != NONE_LABEL:
            candidates = [i for i in candidates if i.image_ref is not None]
        if len(candidates) < k_shots:
            shortfall = k_shots - len(candidates)
            raise SamplingError(
                f"label '{label}' has {len(candidates)} eligible instances, needs {k_shots} (short by {shortfall})",
                label=label,
                shortfall=shortfall,
            )
        picks = sorted(rng.choice(len(candidates), size=k_shots, replace=False).tolist())
        for index in picks:
            support.append(candidates[index])
            chosen_ids.add(candidates[index].id)

    episode_labels = set(selected) | {NONE_LABEL}
    queries = [i for i in dataset.instances if i.id not in chosen_ids and i.label in episode_labels]
    if queries_per_label is not None:
        counts: Dict[str, int] = {}
        limited = []
        for instance in queries:
            if counts.get(instance.label, 0) < queries_per_label:
                limited.append(instance)
                counts[instance.label] = counts.get(instance.label, 0) + 1
        queries = limited

    episode = Episode(
        support=support,
        queries=queries,
        n_ways=n_ways,
        k_shots=k_shots,
        seed=seed,
        event_types=selected,
        image_root=dataset.image_root,
    )
    logger.debug(f"Sampled episode {episode.summary()}")
    return episode
