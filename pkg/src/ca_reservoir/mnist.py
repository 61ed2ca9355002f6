"""MNIST IDX ingestion with threshold binarization.

IDX format: images files begin with big-endian uint32 magic 0x00000803,
then count, rows, cols (all big-endian uint32), then unsigned pixel bytes
row-major. Label files use magic 0x00000801 followed by count and label
bytes. A pixel maps to bit 1 when its value is at or above the threshold.
"""

from __future__ import annotations

import gzip
import struct

import numpy as np

from .errors import ConsistencyError, FormatError

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801


def _read(path: str) -> bytes:
    if str(path).endswith(".gz"):
        with gzip.open(path, "rb") as fh:
            return fh.read()
    with open(path, "rb") as fh:
        return fh.read()


def load_mnist_idx(
    images_path: str, labels_path: str, threshold: int = 128
) -> tuple[np.ndarray, np.ndarray]:
    """Binarized images (count, rows*cols) uint8 and labels (count,) int64."""
    img = _read(images_path)
    magic, count, rows, cols = struct.unpack_from(">IIII", img)
    if magic != IMAGES_MAGIC:
        raise FormatError(
            f"bad images magic 0x{magic:08x} in {images_path} (expected 0x{IMAGES_MAGIC:08x})"
        )
    expected = 16 + count * rows * cols
    if len(img) < expected:
        raise FormatError(f"images file truncated: {len(img)} bytes < {expected}")
    pixels = np.frombuffer(img, dtype=np.uint8, count=count * rows * cols, offset=16)
    bits = (pixels >= threshold).astype(np.uint8).reshape(count, rows * cols)

    lab = _read(labels_path)
    lmagic, lcount = struct.unpack_from(">II", lab)
    if lmagic != LABELS_MAGIC:
        raise FormatError(
            f"bad labels magic 0x{lmagic:08x} in {labels_path} (expected 0x{LABELS_MAGIC:08x})"
        )
    if lcount != count:
        raise ConsistencyError(f"image count {count} != label count {lcount}")
    if len(lab) < 8 + lcount:
        raise FormatError(f"labels file truncated: {len(lab)} bytes < {8 + lcount}")
    labels = np.frombuffer(lab, dtype=np.uint8, count=lcount, offset=8).astype(np.int64)
    return bits, labels
