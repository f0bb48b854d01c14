"""Compact transformer encoder for six-way post classification."""

from __future__ import annotations

import torch
from torch import nn


class PostEncoder(nn.Module):
    """Token ids (batch, max_len) -> class logits (batch, 6).

    Padding ids are masked out of attention and excluded from the mean pool,
    so the traced graph behaves identically for any real token count.
    """

    def __init__(
        self,
        vocab_size: int,
        n_classes: int,
        max_len: int,
        embed_dim: int = 64,
        heads: int = 2,
        layers: int = 2,
        feedforward_dim: int = 128,
        pad_id: int = 0,
        dropout: float = 0.1,
    ) -> None:
        super().__init__()
        self.pad_id = pad_id
        self.embed = nn.Embedding(vocab_size, embed_dim, padding_idx=pad_id)
        self.positions = nn.Parameter(torch.zeros(1, max_len, embed_dim))
        layer = nn.TransformerEncoderLayer(
            d_model=embed_dim,
            nhead=heads,
            dim_feedforward=feedforward_dim,
            dropout=dropout,
            batch_first=True,
        )
        # nested-tensor/fastpath conversion is shape-specializing and breaks
        # tracing; the plain path serializes cleanly
        self.encoder = nn.TransformerEncoder(layer, num_layers=layers, enable_nested_tensor=False)
        self.head = nn.Linear(embed_dim, n_classes)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        padding = ids.eq(self.pad_id)
        x = self.embed(ids) + self.positions[:, : ids.size(1)]
        x = self.encoder(x, src_key_padding_mask=padding)
        keep = (~padding).unsqueeze(-1).to(x.dtype)
        pooled = (x * keep).sum(dim=1) / keep.sum(dim=1).clamp(min=1.0)
        return self.head(pooled)
