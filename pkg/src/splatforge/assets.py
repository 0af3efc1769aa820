"""Content-addressed asset store.

Assets are immutable byte blobs keyed by the SHA-256 of their content, so
equal content always maps to the same id (which makes logged references
stable across replays) and clients can cache aggressively.
"""

from __future__ import annotations

import hashlib
import threading
from pathlib import Path


class MissingAsset(KeyError):
    def __init__(self, asset_id: str):
        super().__init__(asset_id)
        self.asset_id = asset_id

    def __str__(self) -> str:
        return f"asset {self.asset_id!r} not found"


MEDIA_EXTENSIONS = {
    "image/x-portable-pixmap": ".ppm",
    "image/x-portable-graymap": ".pgm",
    "model/obj": ".obj",
    "application/octet-stream": ".ply",
    "image/png": ".png",
    "text/plain": ".txt",
    "application/json": ".json",
}
_MEDIA_BY_EXTENSION = {v: k for k, v in MEDIA_EXTENSIONS.items()}


def content_id(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class AssetStore:
    """Thread-safe in-memory store, optionally mirrored to a directory."""

    def __init__(self, directory: str | Path | None = None):
        self._blobs: dict[str, tuple[bytes, str]] = {}
        self._lock = threading.Lock()
        self.listeners: list = []  # called as fn(asset_id, media_type) on new blobs
        self.directory = Path(directory) if directory is not None else None
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)
            self._load_directory()

    def _load_directory(self) -> None:
        for path in sorted(self.directory.iterdir()):
            if not path.is_file():
                continue
            media = _MEDIA_BY_EXTENSION.get(path.suffix, "application/octet-stream")
            self._blobs[path.stem] = (path.read_bytes(), media)

    def put(self, data: bytes, media_type: str = "application/octet-stream") -> str:
        asset_id = content_id(data)
        fresh = False
        with self._lock:
            if asset_id not in self._blobs:
                self._blobs[asset_id] = (data, media_type)
                fresh = True
                if self.directory is not None:
                    ext = MEDIA_EXTENSIONS.get(media_type, ".bin")
                    (self.directory / f"{asset_id}{ext}").write_bytes(data)
        if fresh:
            for fn in list(self.listeners):
                try:
                    fn(asset_id, media_type)
                except Exception:
                    pass
        return asset_id

    def get(self, asset_id: str) -> bytes:
        try:
            return self._blobs[asset_id][0]
        except KeyError:
            raise MissingAsset(asset_id) from None

    def media_type(self, asset_id: str) -> str:
        try:
            return self._blobs[asset_id][1]
        except KeyError:
            raise MissingAsset(asset_id) from None

    def __contains__(self, asset_id: str) -> bool:
        return asset_id in self._blobs

    def ids(self) -> list[str]:
        return list(self._blobs)
