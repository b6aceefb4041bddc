"""
執行設定管理系統

RunConfig 以 pydantic 模型描述全部參數，ConfigManager 負責載入與合併：
優先級 命令列覆寫 > 環境變數 > 設定檔 > 預設值
"""

import os
import json
import yaml
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from .exceptions import ConfigurationError

logger = logging.getLogger(__name__)

ENV_PREFIX = "VF_EVENT__"


class DataConfig(BaseModel):
    """資料集與圖片設定"""
    dataset_path: Optional[str] = Field(None, description="JSONL 資料清單")
    image_root: Optional[str] = Field(None, description="圖片相對路徑的根目錄，預設為清單所在目錄")
    labels_path: Optional[str] = Field(None, description="事件類型順序 sidecar 檔")
    resolution: int = Field(32, ge=1, description="工作解析度 R（R×R）")
    decode_workers: int = Field(1, ge=1)


class EncoderConfig(BaseModel):
    """文字 / 視覺編碼器設定"""
    text_dim: int = Field(768, ge=1)
    visual_dim: int = Field(768, ge=1)
    token_dim: Optional[int] = Field(None, ge=1, description="token 嵌入維度，預設同 text_dim")
    dropout_rate: float = Field(0.3, ge=0.0, lt=1.0)
    backend: Literal["toy", "adapter"] = "toy"
    adapter_name: Optional[str] = None
    hash_buckets: int = Field(4096, ge=1, description="字彙外 token 的雜湊桶數")

    @property
    def fused_dim(self) -> int:
        return self.text_dim + self.visual_dim

    @model_validator(mode="after")
    def _check_adapter(self):
        if self.backend == "adapter" and not self.adapter_name:
            raise ValueError("backend 'adapter' requires adapter_name")
        return self


class ImaginatorConfig(BaseModel):
    """Visual Imaginator 設定"""
    num_steps: int = Field(1000, ge=1, description="擴散步數 T")
    schedule: Literal["cosine", "linear"] = "cosine"
    omega: float = Field(1.0, ge=0.0)
    target_policy: Literal["ground_truth", "synthesized"] = "ground_truth"
    sample_steps: int = Field(50, ge=1)
    codec: str = Field("identity", description="潛在空間 codec 名稱")
    hidden_dim: int = Field(256, ge=1)
    cond_dim: int = Field(64, ge=1)
    time_dim: int = Field(32, ge=2)
    hash_buckets: int = Field(4096, ge=1)
    learning_rate: float = Field(2e-5, gt=0.0)
    batch_size: int = Field(4, ge=1)
    customize_steps: Optional[int] = Field(None, ge=0, description="None 表示每個訓練 epoch 走一輪 support")
    pretrain_steps: int = Field(0, ge=0)
    init_checkpoint: Optional[str] = None

    @field_validator("time_dim")
    @classmethod
    def _even_time_dim(cls, v: int) -> int:
        if v % 2:
            raise ValueError("time_dim must be even")
        return v


class TrainConfig(BaseModel):
    """訓練設定"""
    learning_rate: float = Field(2e-5, gt=0.0)
    batch_size: int = Field(4, ge=1)
    epochs: int = Field(50, ge=0)
    beta: float = Field(0.01, ge=0.0)
    seed: int = 0
    mode: Literal["staged", "joint"] = "staged"
    k_shots: int = Field(5, ge=1)
    n_ways: int = Field(8, ge=1)
    freeze_policy: Literal["cond_encoder", "all_trainable"] = "cond_encoder"
    train_modality: Literal["both", "text", "visual"] = "both"
    adam_betas: Tuple[float, float] = (0.9, 0.999)
    precision: Literal["float64", "float32"] = "float64"
    checkpoint_every: int = Field(0, ge=0, description="每幾個 epoch 存一次中間 checkpoint，0 表示不存")


class EvalConfig(BaseModel):
    """評估設定"""
    shots: List[int] = Field(default_factory=lambda: [5, 10, 15, 20])
    modes: List[str] = Field(default_factory=lambda: ["imagine"])
    seeds: List[int] = Field(default_factory=lambda: [0])
    include_none: bool = False
    queries_per_label: Optional[int] = Field(None, ge=1)
    workers: int = Field(1, ge=1)

    @field_validator("shots")
    @classmethod
    def _positive_shots(cls, v: List[int]) -> List[int]:
        if not v or any(k < 1 for k in v):
            raise ValueError("shots must be a non-empty list of positive integers")
        return v

    @field_validator("modes")
    @classmethod
    def _known_modes(cls, v: List[str]) -> List[str]:
        from ..inference.modes import VisualMode

        known = {m.value for m in VisualMode}
        unknown = [m for m in v if m not in known]
        if not v or unknown:
            raise ValueError(f"unknown visual modes: {unknown}")
        return v


class LoggingConfig(BaseModel):
    """日誌設定"""
    level: str = "INFO"
    file: Optional[str] = None
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    @field_validator("level")
    @classmethod
    def _known_level(cls, v: str) -> str:
        v = v.upper()
        if v not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level: {v}")
        return v


class RunConfig(BaseModel):
    """完整執行設定"""
    data: DataConfig = Field(default_factory=DataConfig)
    encoder: EncoderConfig = Field(default_factory=EncoderConfig)
    imaginator: ImaginatorConfig = Field(default_factory=ImaginatorConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    output_dir: str = "outputs"

    def check_paths(self) -> None:
        """確認所有引用的路徑都存在"""
        paths = {
            "data.dataset_path": self.data.dataset_path,
            "data.image_root": self.data.image_root,
            "data.labels_path": self.data.labels_path,
            "imaginator.init_checkpoint": self.imaginator.init_checkpoint,
        }
        missing = [f"{key}={value}" for key, value in paths.items() if value and not Path(value).exists()]
        if missing:
            raise ConfigurationError(f"referenced paths do not exist: {', '.join(missing)}")

    def model_section(self) -> Dict[str, Any]:
        """寫入 checkpoint 的設定（不含輸出路徑與日誌）"""
        return self.model_dump(mode="json", exclude={"output_dir", "logging"})


def _parse_scalar(raw: str) -> Any:
    # YAML 規則解析 "0.1"、"true"、"[5, 10]" 等字面值
    try:
        return yaml.safe_load(raw)
    except yaml.YAMLError:
        return raw


def _set_dotted(data: Dict[str, Any], dotted_key: str, value: Any) -> None:
    parts = dotted_key.split(".")
    node = data
    for part in parts[:-1]:
        child = node.get(part)
        if not isinstance(child, dict):
            child = {}
            node[part] = child
        node = child
    node[parts[-1]] = value


class ConfigManager:
    """設定管理器（優先級：命令列覆寫 > 環境變數 > 設定檔 > 預設值）"""

    def __init__(self,
                 config_path: Optional[str] = None,
                 overrides: Optional[Sequence[str]] = None,
                 environ: Optional[Dict[str, str]] = None):
        self.config_path = config_path
        self.overrides = list(overrides or [])
        self.environ = dict(os.environ if environ is None else environ)
        self.config = self._load_configuration()

    def _load_configuration(self) -> RunConfig:
        data: Dict[str, Any] = {}

        # 1. 設定檔
        if self.config_path:
            data = self._load_from_file(self.config_path)

        # 2. 環境變數
        self._apply_env_overrides(data)

        # 3. 命令列覆寫
        for item in self.overrides:
            if "=" not in item:
                raise ConfigurationError(f"override must look like section.field=value: {item!r}")
            key, raw = item.split("=", 1)
            _set_dotted(data, key.strip(), _parse_scalar(raw.strip()))

        config = self._validate_config(data)
        logger.info("Configuration loaded successfully")
        return config

    def _load_from_file(self, file_path: str) -> Dict[str, Any]:
        path = Path(file_path)
        if not path.exists():
            raise ConfigurationError(f"config file not found: {file_path}")
        try:
            with open(path, "r", encoding="utf-8") as f:
                if path.suffix in (".yaml", ".yml"):
                    data = yaml.safe_load(f) or {}
                else:
                    data = json.load(f)
        except (yaml.YAMLError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"failed to parse config {file_path}: {e}") from e

        if not isinstance(data, dict):
            raise ConfigurationError(f"config root must be a mapping: {file_path}")
        logger.info(f"Loaded configuration from {file_path}")
        return data

    def _apply_env_overrides(self, data: Dict[str, Any]) -> None:
        """VF_EVENT__TRAIN__BETA=0.1 → train.beta"""
        for name in sorted(self.environ):
            if not name.startswith(ENV_PREFIX):
                continue
            dotted = name[len(ENV_PREFIX):].lower().replace("__", ".")
            _set_dotted(data, dotted, _parse_scalar(self.environ[name]))
            logger.debug(f"Environment override {dotted}")

    def _validate_config(self, data: Dict[str, Any]) -> RunConfig:
        try:
            return RunConfig.model_validate(data)
        except ValidationError as e:
            raise ConfigurationError(f"invalid configuration: {e}") from e

    def get_config(self) -> RunConfig:
        return self.config


def load_run_config(config_path: Optional[str] = None,
                    overrides: Optional[Sequence[str]] = None,
                    environ: Optional[Dict[str, str]] = None) -> RunConfig:
    """載入設定的便捷函數"""
    return ConfigManager(config_path, overrides, environ).get_config()
