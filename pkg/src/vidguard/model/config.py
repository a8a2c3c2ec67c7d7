"""Architecture and training configuration for the fusion classifier."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

ALL_BRANCHES = ("title", "tags", "thumbnail", "stats")


@dataclass(frozen=True)
class ModelConfig:
    """Four-branch fusion architecture parameters.

    With the defaults, the concatenated branch outputs form a
    32 + 32 + 2048 + 25 = 2137-dimensional fusion input.
    """

    title_vocab_size: int
    tags_vocab_size: int
    stats_dim: int
    embed_dim: int = 32
    title_len: int = 21
    tags_len: int = 78
    lstm_units: int = 32
    stats_hidden: int = 25
    thumbnail_dim: int = 2048
    fusion_units: int = 512
    dropout: float = 0.5
    n_classes: int = 4
    branches: tuple[str, ...] = ALL_BRANCHES

    def __post_init__(self):
        if self.n_classes not in (2, 4):
            raise ValueError("n_classes must be 2 or 4")
        unknown = set(self.branches) - set(ALL_BRANCHES)
        if unknown or not self.branches:
            raise ValueError(f"invalid branch subset: {self.branches}")
        for name in (
            "title_vocab_size",
            "tags_vocab_size",
            "stats_dim",
            "embed_dim",
            "lstm_units",
            "stats_hidden",
            "thumbnail_dim",
            "fusion_units",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")

    @property
    def branch_widths(self) -> dict[str, int]:
        return {
            "title": self.lstm_units,
            "tags": self.lstm_units,
            "thumbnail": self.thumbnail_dim,
            "stats": self.stats_hidden,
        }

    @property
    def fusion_input(self) -> int:
        return sum(self.branch_widths[b] for b in self.branches)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["branches"] = list(self.branches)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        d["branches"] = tuple(d.get("branches", ALL_BRANCHES))
        return cls(**d)


@dataclass(frozen=True)
class TrainHyperparams:
    learning_rate: float = 1e-5
    epsilon: float = 1e-8
    epochs: int = 50
    batch_size: int = 32
    rng_seed: int = 0
    early_stopping_patience: int = 5
    deterministic: bool = True

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainHyperparams":
        return cls(**d)
