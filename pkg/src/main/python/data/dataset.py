"""
多模態資料集載入與驗證

JSONL 清單每行一筆：{"id", "text", "event_type", "image"}；
event_type 為 "none" 代表非事件句，image 為相對 image_root 的路徑或 null
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

from PIL import Image, UnidentifiedImageError

from ..core.exceptions import (
    DatasetParseError,
    DatasetValidationError,
    SchemaError,
    VFEventError,
)

logger = logging.getLogger(__name__)

NONE_LABEL = "none"

_REQUIRED_FIELDS: Dict[str, Tuple[type, ...]] = {
    "id": (str,),
    "text": (str,),
    "event_type": (str,),
}


def tokenize(text: str) -> List[str]:
    """小寫後以空白切詞"""
    return text.lower().split()


@dataclass(frozen=True)
class Instance:
    """一個句子，附帶選用的圖片與事件類型"""
    id: str
    text: str
    label: str
    image_ref: Optional[str] = None

    @property
    def tokens(self) -> List[str]:
        return tokenize(self.text)

    @property
    def is_none(self) -> bool:
        return self.label == NONE_LABEL

    def to_dict(self) -> Dict[str, Any]:
        """轉換為清單格式"""
        return {
            "id": self.id,
            "text": self.text,
            "event_type": self.label,
            "image": self.image_ref,
        }


@dataclass
class Dataset:
    """資料集：instances + 有序事件類型（不含 none）"""
    instances: List[Instance]
    event_types: List[str]
    image_root: Optional[Path] = None

    def __post_init__(self):
        if len(set(self.event_types)) != len(self.event_types):
            raise DatasetValidationError("duplicate event types", self.event_types)
        if NONE_LABEL in self.event_types:
            raise DatasetValidationError(f"'{NONE_LABEL}' cannot be a declared event type")
        self._label_index = {label: i for i, label in enumerate(self.labels)}

    @property
    def labels(self) -> List[str]:
        """所有標籤，none 固定在最後（索引 N）"""
        return [*self.event_types, NONE_LABEL]

    def label_index(self, label: str) -> int:
        return self._label_index[label]

    def by_label(self) -> Dict[str, List[Instance]]:
        """依標籤分組，組內保持清單順序"""
        groups: Dict[str, List[Instance]] = {label: [] for label in self.labels}
        for instance in self.instances:
            groups[instance.label].append(instance)
        return groups

    def resolve_image(self, instance: Instance) -> Optional[Path]:
        if instance.image_ref is None:
            return None
        ref = Path(instance.image_ref)
        if ref.is_absolute() or self.image_root is None:
            return ref
        return self.image_root / ref

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self) -> Iterator[Instance]:
        return iter(self.instances)


@dataclass
class ValidationIssue:
    """一筆驗證問題"""
    kind: str
    message: str
    record_id: Optional[str] = None
    line_number: Optional[int] = None

    def __str__(self) -> str:
        where = self.record_id if self.record_id is not None else f"line {self.line_number}"
        return f"[{self.kind}] {where}: {self.message}"


@dataclass
class ValidationReport:
    """cmd_validate 使用的完整驗證結果"""
    path: str
    num_records: int = 0
    event_types: List[str] = field(default_factory=list)
    issues: List[ValidationIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def summary(self) -> str:
        return f"{len(self.issues)} errors ({self.num_records} records, {len(self.event_types)} event types)"


def parse_record(line: str, line_number: int) -> Instance:
    """解析並檢查單行 JSONL"""
    try:
        record = json.loads(line)
    except json.JSONDecodeError as e:
        raise DatasetParseError(f"malformed JSON: {e.msg}", line_number) from e

    if not isinstance(record, dict):
        raise SchemaError("record must be a JSON object", line_number)

    for name, types in _REQUIRED_FIELDS.items():
        if name not in record:
            raise SchemaError(f"missing field '{name}'", line_number)
        if not isinstance(record[name], types):
            raise SchemaError(f"field '{name}' must be a string", line_number)

    image = record.get("image")
    if image is not None and not isinstance(image, str):
        raise SchemaError("field 'image' must be a string or null", line_number)

    return Instance(
        id=record["id"],
        text=record["text"],
        label=record["event_type"],
        image_ref=image or None,
    )


def read_label_sidecar(path: Path) -> List[str]:
    """讀取事件類型順序檔，每行一個名稱"""
    with open(path, "r", encoding="utf-8") as f:
        return [line.strip() for line in f if line.strip()]


def default_sidecar_path(manifest: Path) -> Path:
    return manifest.with_suffix(".labels.txt")


def _read_records(path: Path) -> Iterator[Tuple[int, str]]:
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if line.strip():
                yield line_number, line


def _image_problem(path: Optional[Path]) -> Optional[str]:
    if path is None:
        return None
    if not path.exists():
        return f"image not found: {path}"
    try:
        with Image.open(path) as img:
            img.verify()
            if img.size[0] == 0 or img.size[1] == 0:
                return f"zero-size image: {path}"
    except (UnidentifiedImageError, OSError, SyntaxError) as e:
        return f"image does not decode: {path} ({e})"
    return None


def _check_records(instances: Sequence[Instance],
                   event_types: Optional[List[str]],
                   image_root: Path,
                   check_images: bool) -> Tuple[List[str], List[ValidationIssue]]:
    issues: List[ValidationIssue] = []

    seen: Dict[str, int] = {}
    for instance in instances:
        seen[instance.id] = seen.get(instance.id, 0) + 1
    for record_id, count in seen.items():
        if count > 1:
            issues.append(ValidationIssue("duplicate_id", f"id appears {count} times", record_id))

    for instance in instances:
        if not instance.tokens:
            issues.append(ValidationIssue("empty_text", "text is empty", instance.id))

    labels_in_data = sorted({i.label for i in instances if i.label != NONE_LABEL})
    if event_types is None:
        event_types = labels_in_data
    else:
        declared = set(event_types)
        for instance in instances:
            if instance.label != NONE_LABEL and instance.label not in declared:
                issues.append(ValidationIssue("unknown_label", f"label '{instance.label}' not declared", instance.id))

    if check_images:
        resolver = Dataset(instances=[], event_types=[], image_root=image_root)
        for instance in instances:
            problem = _image_problem(resolver.resolve_image(instance))
            if problem:
                issues.append(ValidationIssue("dangling_image", problem, instance.id))

    return event_types, issues


def validate_manifest(path: str,
                      image_root: Optional[str] = None,
                      labels_path: Optional[str] = None) -> ValidationReport:
    """完整檢查清單並收集所有問題（不拋出例外）"""
    manifest = Path(path)
    report = ValidationReport(path=str(manifest))
    if not manifest.exists():
        report.issues.append(ValidationIssue("missing_file", f"manifest not found: {manifest}"))
        return report

    instances: List[Instance] = []
    for line_number, line in _read_records(manifest):
        try:
            instances.append(parse_record(line, line_number))
        except VFEventError as e:
            kind = "parse" if isinstance(e, DatasetParseError) else "schema"
            report.issues.append(ValidationIssue(kind, str(e), line_number=line_number))

    report.num_records = len(instances)
    if not instances and not report.issues:
        report.issues.append(ValidationIssue("empty", "empty dataset"))
        return report

    sidecar = Path(labels_path) if labels_path else default_sidecar_path(manifest)
    declared = read_label_sidecar(sidecar) if sidecar.exists() else None
    root = Path(image_root) if image_root else manifest.parent
    report.event_types, issues = _check_records(instances, declared, root, check_images=True)
    report.issues.extend(issues)
    return report


def load_dataset(path: str,
                 image_root: Optional[str] = None,
                 labels_path: Optional[str] = None,
                 check_images: bool = True) -> Dataset:
    """載入並驗證 JSONL 資料集

    event_types 預設為非 none 標籤的排序集合；若有 sidecar（labels_path 或
    <manifest>.labels.txt）則以其順序為準
    """
    manifest = Path(path)
    if not manifest.exists():
        raise DatasetValidationError(f"manifest not found: {manifest}")

    instances = [parse_record(line, n) for n, line in _read_records(manifest)]
    if not instances:
        raise DatasetValidationError("empty dataset")

    sidecar = Path(labels_path) if labels_path else default_sidecar_path(manifest)
    declared = read_label_sidecar(sidecar) if sidecar.exists() else None
    root = Path(image_root) if image_root else manifest.parent

    event_types, issues = _check_records(instances, declared, root, check_images)
    if issues:
        # 以第一類問題為主，列出所有相關 id
        kind = issues[0].kind
        offending = [i.record_id for i in issues if i.kind == kind and i.record_id]
        raise DatasetValidationError(f"{kind}: {issues[0].message}", offending)

    dataset = Dataset(instances=instances, event_types=event_types, image_root=root)
    logger.info(f"Loaded {len(dataset)} instances, {len(event_types)} event types from {manifest}")
    return dataset


def write_manifest(instances: Sequence[Instance], path: Path, event_types: Optional[Sequence[str]] = None) -> Path:
    """寫出 JSONL 清單（及選用的 sidecar）"""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for instance in instances:
            f.write(json.dumps(instance.to_dict(), ensure_ascii=False) + "\n")
    if event_types is not None:
        with open(default_sidecar_path(path), "w", encoding="utf-8") as f:
            f.write("\n".join(event_types) + "\n")
    return path
