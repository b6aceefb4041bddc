"""
編碼器模組

- HashingTokenizer: 空白切詞 + 雜湊桶
- BaseEncoderBackend / ToyBackend: 文字與視覺編碼後端，依名稱註冊
- encode_text / encode_image / fuse: 單筆編碼與串接融合
"""

from .backends import (
    BackendManager,
    BaseEncoderBackend,
    ToyBackend,
    available_backends,
    create_backend,
    register_backend,
)
from .fusion import encode_image, encode_text, fuse
from .tokenizer import HashingTokenizer

__all__ = [
    "BackendManager",
    "BaseEncoderBackend",
    "ToyBackend",
    "available_backends",
    "create_backend",
    "register_backend",
    "encode_image",
    "encode_text",
    "fuse",
    "HashingTokenizer",
]
