"""
vf_event 領域例外

所有可預期的失敗都落在 VFEventError 之下，exit_code 對應命令列的結束碼：
1 = 使用者 / 資料驗證錯誤，2 = 內部或數值錯誤
"""

from typing import Any, List, Optional, Sequence


class VFEventError(Exception):
    """vf_event 例外基類"""

    exit_code: int = 1


class DatasetParseError(VFEventError, ValueError):
    """資料清單某一行不是合法 JSON"""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class SchemaError(VFEventError, ValueError):
    """欄位缺漏或型別錯誤"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}{message}")
        self.line_number = line_number


class DatasetValidationError(VFEventError, ValueError):
    """資料集層級的驗證失敗（空資料集、重複 id、懸空圖片…）"""

    def __init__(self, message: str, offending_ids: Sequence[str] = ()):
        ids = list(offending_ids)
        if ids:
            message = f"{message}: {', '.join(ids)}"
        super().__init__(message)
        self.offending_ids: List[str] = ids


class ImageDecodeError(VFEventError, ValueError):
    """圖片無法讀取或解碼"""


class SamplingError(VFEventError, ValueError):
    """episode 取樣失敗"""

    def __init__(self, message: str, label: Optional[str] = None, shortfall: int = 0):
        super().__init__(message)
        self.label = label
        self.shortfall = shortfall


class InputError(VFEventError, ValueError):
    """呼叫端輸入不合法（空 token 序列、解析度不符…）"""


class ParameterError(VFEventError, ValueError):
    """數值參數超出允許範圍"""


class ConfigurationError(VFEventError, ValueError):
    """設定檔結構、路徑或模式前置條件錯誤"""


class CustomizationError(VFEventError, ValueError):
    """Imaginator 客製化失敗"""


class CheckpointError(VFEventError, ValueError):
    """checkpoint 無法讀取或版本不符"""


class NumericalError(VFEventError, ArithmeticError):
    """出現非有限值（NaN / Inf）"""

    exit_code = 2


class TrainingError(VFEventError, RuntimeError):
    """訓練發散；攜帶發生步數與當下的訓練紀錄"""

    exit_code = 2

    def __init__(self, message: str, step: int = -1, log: Any = None):
        super().__init__(f"step {step}: {message}")
        self.step = step
        self.log = log


__all__ = [
    "VFEventError",
    "DatasetParseError",
    "SchemaError",
    "DatasetValidationError",
    "ImageDecodeError",
    "SamplingError",
    "InputError",
    "ParameterError",
    "ConfigurationError",
    "CustomizationError",
    "CheckpointError",
    "NumericalError",
    "TrainingError",
]
