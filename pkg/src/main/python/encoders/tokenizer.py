"""
空白切詞 tokenizer

字彙由訓練 support 文字建立；字彙外的 token 以 md5 雜湊落入固定數量的桶
"""

import hashlib
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Sequence

import torch

from ..core.exceptions import InputError
from ..data.dataset import tokenize


def _bucket(token: str, num_buckets: int) -> int:
    digest = hashlib.md5(token.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % num_buckets


@dataclass
class HashingTokenizer:
    """字彙 + 雜湊桶 tokenizer；id 範圍 [0, len(vocab) + hash_buckets)"""
    vocab: List[str] = field(default_factory=list)
    hash_buckets: int = 4096

    def __post_init__(self):
        if self.hash_buckets < 1:
            raise InputError("hash_buckets must be >= 1")
        self._index = {token: i for i, token in enumerate(self.vocab)}

    @classmethod
    def build(cls, texts: Iterable[str], hash_buckets: int = 4096) -> "HashingTokenizer":
        """依首次出現順序建立字彙"""
        vocab: List[str] = []
        seen = set()
        for text in texts:
            for token in tokenize(text):
                if token not in seen:
                    seen.add(token)
                    vocab.append(token)
        return cls(vocab=vocab, hash_buckets=hash_buckets)

    @property
    def size(self) -> int:
        return len(self.vocab) + self.hash_buckets

    def token_id(self, token: str) -> int:
        index = self._index.get(token)
        if index is not None:
            return index
        return len(self.vocab) + _bucket(token, self.hash_buckets)

    def encode(self, tokens: Sequence[str]) -> List[int]:
        if not tokens:
            raise InputError("empty token sequence")
        return [self.token_id(t.lower()) for t in tokens]

    def encode_batch(self, batch: Sequence[Sequence[str]]) -> Dict[str, torch.Tensor]:
        """轉成 EmbeddingBag 的 (ids, offsets) 格式"""
        ids: List[int] = []
        offsets: List[int] = []
        for tokens in batch:
            offsets.append(len(ids))
            ids.extend(self.encode(tokens))
        return {
            "input": torch.tensor(ids, dtype=torch.long),
            "offsets": torch.tensor(offsets, dtype=torch.long),
        }

    def to_dict(self) -> Dict[str, Any]:
        return {"vocab": list(self.vocab), "hash_buckets": self.hash_buckets}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "HashingTokenizer":
        return cls(vocab=list(data["vocab"]), hash_buckets=int(data["hash_buckets"]))
