"""Encoder registry: pretrained vision-language models and a toy stand-in.

Every encoder exposes ``dim``, ``name``, ``preprocessing``,
``encode_images(list[PIL.Image]) -> (n, dim) array`` and
``encode_texts(list[str]) -> (n, dim) array``. Outputs are raw encoder
features; normalization is the engine's explicit, separate step.

``toy:<dim>`` is a deterministic hash-based encoder with no weights or
network dependency, used for pipeline and conformance testing.
"""
from __future__ import annotations

import hashlib

import numpy as np


class UnknownEncoder(Exception):
    pass


class EncoderUnavailable(Exception):
    """The encoder exists but its weights or framework cannot be loaded."""


def _hash_to_vector(payload: bytes, dim: int) -> np.ndarray:
    """Expand a byte payload into dim floats in [-1, 1], deterministically."""
    out = np.empty(dim, dtype=np.float64)
    counter = 0
    filled = 0
    while filled < dim:
        digest = hashlib.sha256(payload + counter.to_bytes(4, "little")).digest()
        chunk = np.frombuffer(digest, dtype="<u4").astype(np.float64)
        chunk = chunk / 2147483647.5 - 1.0
        take = min(dim - filled, chunk.size)
        out[filled:filled + take] = chunk[:take]
        filled += take
        counter += 1
    return out


class ToyEncoder:
    """Deterministic hash features over resized pixels / UTF-8 text."""

    preprocessing = "rgb-resize-32x32-nearest"

    def __init__(self, dim: int = 64):
        if dim < 1:
            raise UnknownEncoder(f"toy encoder dim must be positive, got {dim}")
        self.dim = dim
        self.name = f"toy:{dim}"

    def encode_images(self, images) -> np.ndarray:
        rows = []
        for img in images:
            small = img.convert("RGB").resize((32, 32))
            rows.append(_hash_to_vector(b"img" + small.tobytes(), self.dim))
        return np.stack(rows) if rows else np.zeros((0, self.dim))

    def encode_texts(self, texts) -> np.ndarray:
        rows = [_hash_to_vector(b"txt" + t.encode("utf-8"), self.dim) for t in texts]
        return np.stack(rows) if rows else np.zeros((0, self.dim))


class HfClipEncoder:
    """CLIP-family encoder backed by transformers; loaded lazily."""

    preprocessing = "hf-clip-eval-transform"

    def __init__(self, model_id: str):
        try:
            import torch
            from transformers import CLIPModel, CLIPProcessor
        except ImportError as e:
            raise EncoderUnavailable(f"transformers/torch not installed: {e}") from e
        try:
            self._model = CLIPModel.from_pretrained(model_id)
            self._processor = CLIPProcessor.from_pretrained(model_id)
        except Exception as e:
            raise EncoderUnavailable(f"cannot load weights for {model_id}: {e}") from e
        self._torch = torch
        self._model.eval()
        self.dim = int(self._model.config.projection_dim)
        self.name = model_id

    def encode_images(self, images) -> np.ndarray:
        inputs = self._processor(images=list(images), return_tensors="pt")
        with self._torch.no_grad():
            feats = self._model.get_image_features(**inputs)
        return feats.cpu().numpy().astype(np.float64)

    def encode_texts(self, texts) -> np.ndarray:
        inputs = self._processor(text=list(texts), return_tensors="pt",
                                 padding=True, truncation=True)
        with self._torch.no_grad():
            feats = self._model.get_text_features(**inputs)
        return feats.cpu().numpy().astype(np.float64)


_CLIP_ALIASES = {
    "clip-vit-b32": "openai/clip-vit-base-patch32",
    "clip-vit-b16": "openai/clip-vit-base-patch16",
    "clip-vit-l14": "openai/clip-vit-large-patch14",
}


def get_encoder(name: str):
    if name.startswith("toy:"):
        try:
            dim = int(name.split(":", 1)[1])
        except ValueError:
            raise UnknownEncoder(f"bad toy encoder spec {name!r}")
        return ToyEncoder(dim)
    if name == "toy":
        return ToyEncoder()
    if name in _CLIP_ALIASES:
        return HfClipEncoder(_CLIP_ALIASES[name])
    if "/" in name:  # explicit hub id
        return HfClipEncoder(name)
    raise UnknownEncoder(
        f"unknown encoder {name!r}; use toy[:dim], one of "
        f"{sorted(_CLIP_ALIASES)}, or a hub model id"
    )
