"""測試共用的小工具"""

from typing import Any, Dict

from src.main.python.core.config import RunConfig

TOY_SETTINGS: Dict[str, Any] = {
    "data": {"resolution": 4},
    "encoder": {"text_dim": 16, "visual_dim": 16, "dropout_rate": 0.0, "hash_buckets": 64},
    "imaginator": {
        "num_steps": 100,
        "sample_steps": 20,
        "hidden_dim": 64,
        "cond_dim": 16,
        "time_dim": 16,
        "hash_buckets": 64,
        "learning_rate": 3e-3,
        "customize_steps": 200,
    },
    "train": {"learning_rate": 1e-2, "batch_size": 4, "epochs": 30, "n_ways": 4, "k_shots": 5},
    "eval": {"shots": [5], "modes": ["actual"], "seeds": [0]},
}


def make_config(**sections: Any) -> RunConfig:
    """TOY_SETTINGS 逐段合併 sections 後驗證"""
    data = {key: dict(value) for key, value in TOY_SETTINGS.items()}
    for key, value in sections.items():
        if isinstance(value, dict):
            data.setdefault(key, {}).update(value)
        else:
            data[key] = value
    return RunConfig.model_validate(data)
