"""Convolutional branch over word embeddings.

Kim-style text CNN: gather embedding rows, convolve with several filter
widths, ReLU, max-over-time pool each feature map to a scalar, and
concatenate. The embedding rows are trainable during fused fine-tuning;
PAD rows start at zero so convolving across padding is benign.
"""

from dataclasses import dataclass, field

import torch
from torch import nn

from .errors import ShapeError
from .lexical import EmbeddingTable


@dataclass
class CnnConfig:
    filter_sizes: tuple = (3, 4, 5)
    filters_per_size: int = 100
    embedding_dim: int = 300
    max_words: int = 36
    dropout_rate: float = 0.5

    def __post_init__(self):
        self.filter_sizes = tuple(self.filter_sizes)
        if not self.filter_sizes:
            raise ValueError("filter_sizes must be non-empty")
        if any(k < 1 or k > self.max_words for k in self.filter_sizes):
            raise ValueError(
                f"filter sizes {self.filter_sizes} must lie in [1, max_words={self.max_words}]"
            )
        if not 0 <= self.dropout_rate < 1:
            raise ValueError("dropout_rate must be in [0, 1)")

    @property
    def output_dim(self):
        return len(self.filter_sizes) * self.filters_per_size


@dataclass
class CnnFeatures:
    c: torch.Tensor = field(repr=False)


def max_over_time_pool(feature_map):
    """Maximum of a feature map over its position axis (the last one)."""
    if isinstance(feature_map, torch.Tensor):
        if feature_map.numel() == 0:
            raise ShapeError("cannot pool an empty feature map")
        return feature_map.max(dim=-1).values
    if len(feature_map) == 0:
        raise ShapeError("cannot pool an empty feature map")
    return max(feature_map)


class CnnBranch(nn.Module):
    """Convolution + ReLU + max-over-time over a text's embedding matrix."""

    def __init__(self, embeddings: EmbeddingTable, config: CnnConfig):
        super().__init__()
        if embeddings.dim != config.embedding_dim:
            raise ShapeError(
                f"cnn: embedding table dim {embeddings.dim} != config {config.embedding_dim}"
            )
        self.config = config
        self.embedding = nn.Embedding.from_pretrained(
            torch.from_numpy(embeddings.matrix.copy()), freeze=False, padding_idx=0
        )
        self.convs = nn.ModuleList(
            nn.Conv1d(config.embedding_dim, config.filters_per_size, kernel_size=k)
            for k in config.filter_sizes
        )
        self.dropout = nn.Dropout(config.dropout_rate)

    @property
    def output_dim(self):
        return self.config.output_dim

    def forward(self, token_indices: torch.Tensor) -> torch.Tensor:
        """Map (batch, max_words) token indices to (batch, output_dim)."""
        if token_indices.dim() == 1:
            token_indices = token_indices.unsqueeze(0)
        if token_indices.shape[1] != self.config.max_words:
            raise ShapeError(
                f"cnn: expected sequences of {self.config.max_words} indices, "
                f"got {token_indices.shape[1]}"
            )
        embedded = self.embedding(token_indices)          # (B, T, E)
        embedded = embedded.transpose(1, 2)               # (B, E, T)
        pooled = [
            max_over_time_pool(torch.relu(conv(embedded)))  # (B, F)
            for conv in self.convs
        ]
        return self.dropout(torch.cat(pooled, dim=1))

    def features(self, token_indices: torch.Tensor) -> CnnFeatures:
        return CnnFeatures(c=self.forward(token_indices))
