"""圖片讀寫：像素值 [0,255] ↔ [-1,1] 的線性映射"""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError

from ..core.exceptions import DatasetValidationError, ImageDecodeError, InputError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def load_image(ref: PathLike, resolution: int, dtype: torch.dtype = torch.float64) -> torch.Tensor:
    """讀取圖片，縮放到 resolution×resolution，回傳 (3, R, R) 的 [-1, 1] 張量"""
    path = Path(ref)
    try:
        with Image.open(path) as img:
            if img.size[0] == 0 or img.size[1] == 0:
                raise DatasetValidationError(f"zero-size image: {path}")
            rgb = img.convert("RGB")
            if rgb.size != (resolution, resolution):
                rgb = rgb.resize((resolution, resolution), Image.BILINEAR)
            pixels = np.asarray(rgb, dtype=np.float64)
    except (FileNotFoundError, UnidentifiedImageError, OSError, SyntaxError) as e:
        raise ImageDecodeError(f"cannot decode image {path}: {e}") from e

    array = pixels / 255.0 * 2.0 - 1.0
    return torch.from_numpy(np.ascontiguousarray(array.transpose(2, 0, 1))).to(dtype)


def save_image(array: torch.Tensor, path: PathLike) -> Path:
    """以 PNG 寫出 (3, R, R) 的 [-1, 1] 張量"""
    check_image_array(array)
    pixels = ((array.detach().cpu().double().numpy() + 1.0) / 2.0 * 255.0).round()
    pixels = np.ascontiguousarray(np.clip(pixels, 0, 255).astype(np.uint8).transpose(1, 2, 0))
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(pixels).save(out, format="PNG")
    return out


def zero_image(resolution: int, dtype: torch.dtype = torch.float64) -> torch.Tensor:
    return torch.zeros(3, resolution, resolution, dtype=dtype)


def check_image_array(array: torch.Tensor, resolution: Optional[int] = None) -> None:
    """檢查 ImageArray 不變量：3 通道、有限、落在 [-1, 1]、解析度正確"""
    if array.dim() != 3 or array.shape[0] != 3:
        raise InputError(f"image must have shape (3, R, R), got {tuple(array.shape)}")
    if resolution is not None and tuple(array.shape[1:]) != (resolution, resolution):
        raise InputError(f"image resolution {tuple(array.shape[1:])} != working resolution {resolution}")
    if not torch.isfinite(array).all():
        raise InputError("image contains non-finite values")
    if array.min() < -1.0 or array.max() > 1.0:
        raise InputError("image values must lie in [-1, 1]")


def load_images(refs: Sequence[Optional[PathLike]],
                resolution: int,
                workers: int = 1,
                dtype: torch.dtype = torch.float64) -> List[torch.Tensor]:
    """平行解碼多張圖片；輸出順序與輸入一致，None 對應零圖片"""

    def _one(ref: Optional[PathLike]) -> torch.Tensor:
        if ref is None:
            return zero_image(resolution, dtype)
        return load_image(ref, resolution, dtype)

    if workers <= 1:
        return [_one(ref) for ref in refs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_one, refs))
