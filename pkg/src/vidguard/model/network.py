"""The four-branch fusion network.

Title and tags each pass through their own embedding + LSTM and are
summarized by the final hidden state at the last non-PAD position; the
thumbnail embedding passes straight through; statistics and style features
go through a 25-unit dense layer. The concatenation feeds a 512-unit
fusing layer with dropout, then the softmax output head.
"""

from __future__ import annotations

import torch
from torch import nn

from ..features.text import PAD
from .config import ModelConfig


class TextBranch(nn.Module):
    """Embedding + LSTM; emits the hidden state at the last real token."""

    def __init__(self, vocab_size: int, embed_dim: int, units: int):
        super().__init__()
        self.embedding = nn.Embedding(vocab_size, embed_dim, padding_idx=PAD)
        self.lstm = nn.LSTM(embed_dim, units, batch_first=True)
        self.units = units

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        lengths = (ids != PAD).sum(dim=1)
        out, _ = self.lstm(self.embedding(ids))
        gather = (lengths - 1).clamp(min=0)
        idx = gather.view(-1, 1, 1).expand(-1, 1, out.size(2))
        last = out.gather(1, idx).squeeze(1)
        # an all-PAD sequence contributes a zero summary
        return last * (lengths > 0).unsqueeze(1).to(last.dtype)


class FusionNet(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        if "title" in config.branches:
            self.title_branch = TextBranch(
                config.title_vocab_size, config.embed_dim, config.lstm_units
            )
        if "tags" in config.branches:
            self.tags_branch = TextBranch(
                config.tags_vocab_size, config.embed_dim, config.lstm_units
            )
        if "stats" in config.branches:
            self.stats_branch = nn.Sequential(
                nn.Linear(config.stats_dim, config.stats_hidden), nn.ReLU()
            )
        self.fusion = nn.Linear(config.fusion_input, config.fusion_units)
        self.fusion_act = nn.ReLU()
        self.fusion_dropout = nn.Dropout(config.dropout)
        self.head = nn.Linear(config.fusion_units, config.n_classes)

    def forward(
        self,
        title_ids: torch.Tensor,
        tag_ids: torch.Tensor,
        thumbnail: torch.Tensor,
        stats: torch.Tensor,
    ) -> torch.Tensor:
        parts = []
        for branch in self.config.branches:
            if branch == "title":
                parts.append(self.title_branch(title_ids))
            elif branch == "tags":
                parts.append(self.tags_branch(tag_ids))
            elif branch == "thumbnail":
                parts.append(thumbnail)
            elif branch == "stats":
                parts.append(self.stats_branch(stats))
        fused = torch.cat(parts, dim=1)
        hidden = self.fusion_dropout(self.fusion_act(self.fusion(fused)))
        return self.head(hidden)

    def predict_proba(self, *inputs) -> torch.Tensor:
        self.eval()
        with torch.no_grad():
            return torch.softmax(self(*inputs), dim=1)
