"""Text encoders behind one classify-this-text interface.

The built-in "mini" encoder is a small word-level transformer initialized
from the run seed; any other encoder id is resolved through HuggingFace
transformers (hub or local path) and fails loudly when unavailable.
"""

from __future__ import annotations

import re

import torch
import torch.nn as nn

MINI_ENCODER_ID = "mini"

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


class MiniVocab:
    PAD = 0
    UNK = 1

    def __init__(self, texts: list[str]):
        tokens = sorted({t for text in texts for t in tokenize(text)})
        self.index = {t: i + 2 for i, t in enumerate(tokens)}

    def __len__(self) -> int:
        return len(self.index) + 2

    def encode(self, text: str, max_len: int) -> list[int]:
        ids = [self.index.get(t, self.UNK) for t in tokenize(text)][:max_len]
        return ids + [self.PAD] * (max_len - len(ids))


class MiniTextClassifier(nn.Module):
    """Word embeddings + 2 transformer layers + masked mean pool + linear head."""

    def __init__(self, vocab_size: int, num_classes: int,
                 dim: int = 64, heads: int = 4, layers: int = 2, max_len: int = 48):
        super().__init__()
        self.max_len = max_len
        self.embed = nn.Embedding(vocab_size, dim, padding_idx=MiniVocab.PAD)
        self.position = nn.Embedding(max_len, dim)
        layer = nn.TransformerEncoderLayer(
            d_model=dim, nhead=heads, dim_feedforward=2 * dim,
            batch_first=True, dropout=0.1,
        )
        self.encoder = nn.TransformerEncoder(
            layer, num_layers=layers, enable_nested_tensor=False
        )
        self.head = nn.Linear(dim, num_classes)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        mask = ids == MiniVocab.PAD
        positions = torch.arange(ids.shape[1], device=ids.device)
        h = self.embed(ids) + self.position(positions)[None, :, :]
        h = self.encoder(h, src_key_padding_mask=mask)
        keep = (~mask).float().unsqueeze(-1)
        pooled = (h * keep).sum(dim=1) / keep.sum(dim=1).clamp(min=1.0)
        return self.head(pooled)


class HuggingFaceClassifier(nn.Module):
    """Pretrained encoder + mean pooling + linear head."""

    def __init__(self, encoder_id: str, num_classes: int, max_len: int = 128):
        super().__init__()
        from transformers import AutoModel, AutoTokenizer

        self.tokenizer = AutoTokenizer.from_pretrained(encoder_id)
        self.encoder = AutoModel.from_pretrained(encoder_id)
        self.head = nn.Linear(self.encoder.config.hidden_size, num_classes)
        self.max_len = max_len

    def encode_batch(self, texts: list[str]) -> dict:
        return self.tokenizer(texts, padding=True, truncation=True,
                              max_length=self.max_len, return_tensors="pt")

    def forward(self, batch: dict) -> torch.Tensor:
        output = self.encoder(**batch)
        mask = batch["attention_mask"].unsqueeze(-1).float()
        pooled = (output.last_hidden_state * mask).sum(dim=1) / mask.sum(dim=1)
        return self.head(pooled)


def build_model(encoder_id: str, texts: list[str], num_classes: int):
    """Return (model, encode(texts) -> model input) for the given encoder id."""
    if encoder_id == MINI_ENCODER_ID:
        vocab = MiniVocab(texts)
        model = MiniTextClassifier(len(vocab), num_classes)

        def encode(batch_texts: list[str]) -> torch.Tensor:
            return torch.tensor(
                [vocab.encode(t, model.max_len) for t in batch_texts], dtype=torch.long
            )

        return model, encode

    try:
        model = HuggingFaceClassifier(encoder_id, num_classes)
    except Exception as exc:  # noqa: BLE001 - any load failure means unusable id
        raise ValueError(
            f"unknown encoder id {encoder_id!r}: not '{MINI_ENCODER_ID}' and not a "
            f"loadable pretrained model ({exc})"
        ) from exc
    return model, model.encode_batch
