"""推論時的視覺情境模式"""

from enum import Enum


class VisualMode(str, Enum):
    """視覺情境來源

    actual: 查詢自帶圖片；imagine: Imaginator 合成；retrieve: 從檢索池取圖；
    zero: 全零圖片；textonly: 視覺嵌入槽設為零向量（L 消融）；
    visualonly: 文字嵌入槽設為零向量、使用真實圖片（V 消融）
    """
    ACTUAL = "actual"
    IMAGINE = "imagine"
    RETRIEVE = "retrieve"
    ZERO = "zero"
    TEXTONLY = "textonly"
    VISUALONLY = "visualonly"

    @property
    def needs_query_image(self) -> bool:
        return self in (VisualMode.ACTUAL, VisualMode.VISUALONLY)
