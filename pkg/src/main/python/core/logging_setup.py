"""日誌系統設定"""

import sys
import logging
from pathlib import Path
from typing import Optional

from .config import LoggingConfig

_NOISY_LOGGERS = ("PIL", "matplotlib", "urllib3")


def setup_logging(config: Optional[LoggingConfig] = None) -> None:
    """設定 root logger：stdout，加上選用的檔案輸出"""
    config = config or LoggingConfig()

    handlers = [logging.StreamHandler(sys.stdout)]
    if config.file:
        log_path = Path(config.file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_path, encoding="utf-8"))

    logging.basicConfig(
        level=getattr(logging, config.level),
        format=config.format,
        handlers=handlers,
        force=True,
    )

    # 設定第三方庫日誌級別
    for name in _NOISY_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)
