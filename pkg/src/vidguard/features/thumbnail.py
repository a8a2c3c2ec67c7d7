"""Thumbnail embeddings via a pluggable backbone provider.

The classifier consumes a fixed 2048-dimensional vector per thumbnail. The
default backbone is a pre-trained Inception-v3 with its classification head
removed; a deterministic hash-based stub supports fully offline tests.
Vectors are cached by content hash so identical bytes are embedded once.
"""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Optional, Protocol, Union

import numpy as np

EMBEDDING_DIM = 2048


class EmbeddingProvider(Protocol):
    def embed(self, image_bytes: bytes) -> np.ndarray:
        """Return a finite vector of length 2048 for the given image bytes."""
        ...


class HashEmbeddingProvider:
    """Deterministic stub: the embedding is drawn from an RNG seeded by the
    content hash. Useful for tests and dry runs; carries no visual signal.
    """

    def embed(self, image_bytes: bytes) -> np.ndarray:
        digest = hashlib.sha256(image_bytes).digest()
        seed = int.from_bytes(digest[:8], "big")
        rng = np.random.default_rng(seed)
        return rng.standard_normal(EMBEDDING_DIM)


class InceptionV3Provider:
    """Transfer-learning backbone: pre-trained Inception-v3 pooled features.

    Images are decoded, resized to 299x299 RGB, and passed through the
    network up to the 2048-unit average-pool layer. Requires torchvision
    weights; construction fails with a clear error when they are missing.
    """

    def __init__(self):
        import io

        import torch
        from PIL import Image
        from torchvision import models, transforms

        self._io = io
        self._torch = torch
        self._Image = Image
        try:
            net = models.inception_v3(weights=models.Inception_V3_Weights.IMAGENET1K_V1)
        except Exception as exc:
            raise RuntimeError(
                "Inception-v3 weights unavailable; use HashEmbeddingProvider "
                "or provide a custom EmbeddingProvider"
            ) from exc
        net.fc = torch.nn.Identity()
        net.aux_logits = False
        net.eval()
        self._net = net
        self._prep = transforms.Compose(
            [
                transforms.Resize((299, 299)),
                transforms.ToTensor(),
                transforms.Normalize(
                    mean=[0.485, 0.456, 0.406], std=[0.229, 0.224, 0.225]
                ),
            ]
        )

    def embed(self, image_bytes: bytes) -> np.ndarray:
        img = self._Image.open(self._io.BytesIO(image_bytes)).convert("RGB")
        with self._torch.no_grad():
            out = self._net(self._prep(img).unsqueeze(0))
        return out.squeeze(0).numpy().astype(np.float64)


class EmbeddingCache:
    """Content-addressed on-disk cache of embedding vectors.

    Entries are named by the SHA-256 of the image bytes; concurrent writers
    race benignly because colliding names hold identical content.
    """

    def __init__(self, directory: Union[str, Path]):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, image_bytes: bytes) -> Path:
        return self.directory / (hashlib.sha256(image_bytes).hexdigest() + ".npy")

    def get(self, image_bytes: bytes) -> Optional[np.ndarray]:
        path = self._path(image_bytes)
        if path.exists():
            return np.load(path)
        return None

    def put(self, image_bytes: bytes, vector: np.ndarray) -> None:
        path = self._path(image_bytes)
        tmp = path.with_suffix(".tmp.npy")
        np.save(tmp, vector)
        tmp.replace(path)


def embed_thumbnail(
    thumbnail_ref: str,
    provider: EmbeddingProvider,
    cache: Optional[EmbeddingCache] = None,
) -> tuple[np.ndarray, bool]:
    """Embed the thumbnail at a local path.

    Returns (vector, missing_flag). A missing or unreadable thumbnail yields
    the zero vector with the flag set instead of raising.
    """
    if not thumbnail_ref:
        return np.zeros(EMBEDDING_DIM), True
    try:
        data = Path(thumbnail_ref).read_bytes()
    except OSError:
        return np.zeros(EMBEDDING_DIM), True
    return embed_bytes(data, provider, cache), False


def embed_bytes(
    data: bytes,
    provider: EmbeddingProvider,
    cache: Optional[EmbeddingCache] = None,
) -> np.ndarray:
    if cache is not None:
        hit = cache.get(data)
        if hit is not None:
            return hit
    try:
        vector = np.asarray(provider.embed(data), dtype=np.float64)
    except Exception:
        return np.zeros(EMBEDDING_DIM)
    if vector.shape != (EMBEDDING_DIM,):
        raise ValueError(f"provider returned shape {vector.shape}, expected ({EMBEDDING_DIM},)")
    if cache is not None:
        cache.put(data, vector)
    return vector
