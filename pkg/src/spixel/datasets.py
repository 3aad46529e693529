"""MNIST ingestion and measurement-dataset construction.

IDX files are the standard big-endian MNIST container; gzip-compressed files
are detected by their two magic bytes and decompressed on the fly.  28x28
digits are scaled to [0, 1] and placed in a 32x32 frame, zero-padded with a
2-pixel border by default (bilinear interpolation available as an alternative).
"""

from __future__ import annotations

import gzip
import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError, DimensionError
from .sensing import (
    HadamardOrder,
    ImageObject,
    SelectionMask,
    fwht,
)

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
RAW_SIDE = 28
SIDE = 32

DATA_DIR_ENV = "SPIXEL_DATA_DIR"

_SPLIT_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


def default_data_dir() -> str:
    return os.environ.get(DATA_DIR_ENV, os.path.join(os.getcwd(), "data"))


def _read_exact(f, n: int, offset: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise DataFormatError(
            f"truncated IDX file: needed {n} bytes for {what} at offset {offset}, got {len(data)}"
        )
    return data


def _open_idx(path: str):
    f = open(path, "rb")
    head = f.read(2)
    f.seek(0)
    if head == b"\x1f\x8b":
        f.close()
        return gzip.open(path, "rb")
    return f


def load_idx_images(path: str) -> np.ndarray:
    """Raw MNIST images from an IDX3 file as a (N, 784) uint8 array."""
    with _open_idx(path) as f:
        magic = struct.unpack(">I", _read_exact(f, 4, 0, "magic"))[0]
        if magic != IMAGE_MAGIC:
            raise DataFormatError(
                f"bad image magic 0x{magic:08x} at offset 0 (expected 0x{IMAGE_MAGIC:08x})"
            )
        count, rows, cols = struct.unpack(">III", _read_exact(f, 12, 4, "dims"))
        if (rows, cols) != (RAW_SIDE, RAW_SIDE):
            raise DataFormatError(f"expected {RAW_SIDE}x{RAW_SIDE} images, got {rows}x{cols} at offset 4")
        data = _read_exact(f, count * rows * cols, 16, f"{count} images")
    return np.frombuffer(data, dtype=np.uint8).reshape(count, rows * cols)


def load_idx_labels(path: str) -> np.ndarray:
    """MNIST labels from an IDX1 file as a (N,) uint8 array in [0, 9]."""
    with _open_idx(path) as f:
        magic = struct.unpack(">I", _read_exact(f, 4, 0, "magic"))[0]
        if magic != LABEL_MAGIC:
            raise DataFormatError(
                f"bad label magic 0x{magic:08x} at offset 0 (expected 0x{LABEL_MAGIC:08x})"
            )
        count = struct.unpack(">I", _read_exact(f, 4, 4, "count"))[0]
        data = _read_exact(f, count, 8, f"{count} labels")
    labels = np.frombuffer(data, dtype=np.uint8)
    bad = np.nonzero(labels > 9)[0]
    if bad.size:
        raise DataFormatError(
            f"label byte {labels[bad[0]]} out of range at offset {8 + int(bad[0])}"
        )
    return labels


def preprocess_batch(raw: np.ndarray, resize: str = "pad") -> np.ndarray:
    """Raw (N, 784) uint8 digits to (N, 1024) float64 objects in [0, 1]."""
    raw = np.asarray(raw)
    if raw.ndim == 1:
        raw = raw[None, :]
    if raw.shape[1] != RAW_SIDE * RAW_SIDE:
        raise DimensionError(f"expected {RAW_SIDE * RAW_SIDE} bytes per image, got {raw.shape[1]}")
    scaled = raw.astype(np.float64) / 255.0
    if resize == "pad":
        out = np.zeros((raw.shape[0], SIDE, SIDE))
        out[:, 2 : 2 + RAW_SIDE, 2 : 2 + RAW_SIDE] = scaled.reshape(-1, RAW_SIDE, RAW_SIDE)
    elif resize == "interp":
        from scipy.ndimage import zoom

        out = np.empty((raw.shape[0], SIDE, SIDE))
        for i, img in enumerate(scaled.reshape(-1, RAW_SIDE, RAW_SIDE)):
            out[i] = zoom(img, SIDE / RAW_SIDE, order=1)
        np.clip(out, 0.0, 1.0, out=out)
    else:
        raise ValueError(f"unknown resize strategy {resize!r}")
    return out.reshape(-1, SIDE * SIDE)


def preprocess(raw: np.ndarray, resize: str = "pad") -> ImageObject:
    """One raw 784-byte digit to a 32x32 ImageObject."""
    return ImageObject(SIDE, preprocess_batch(raw, resize)[0])


@dataclass(frozen=True)
class LabeledImage:
    image: ImageObject
    label: int

    def __post_init__(self):
        if not 0 <= self.label <= 9:
            raise ValueError(f"label {self.label} out of range")


class DatasetSplit:
    """A labeled split held as raw bytes; images preprocess lazily to 32x32.

    Behaves as a sequence of LabeledImage.  Bulk consumers should use
    pixel_matrix() / labels instead of item access.
    """

    def __init__(self, raw_images: np.ndarray, labels: np.ndarray, split_name: str,
                 resize: str = "pad"):
        if split_name not in ("train", "test"):
            raise ValueError(f"split_name must be train or test, got {split_name!r}")
        raw_images = np.asarray(raw_images, dtype=np.uint8)
        labels = np.asarray(labels, dtype=np.uint8)
        if raw_images.shape[0] != labels.shape[0]:
            raise DimensionError("image and label counts differ")
        if np.any(labels > 9):
            raise ValueError("labels must lie in [0, 9]")
        self.raw_images = raw_images
        self.labels = labels
        self.split_name = split_name
        self.resize = resize

    def __len__(self) -> int:
        return self.raw_images.shape[0]

    def __getitem__(self, i: int) -> LabeledImage:
        return LabeledImage(preprocess(self.raw_images[i], self.resize), int(self.labels[i]))

    def pixel_matrix(self) -> np.ndarray:
        """All images as an (N, 1024) float64 matrix."""
        return preprocess_batch(self.raw_images, self.resize)

    def subset(self, idx) -> "DatasetSplit":
        return DatasetSplit(self.raw_images[idx], self.labels[idx], self.split_name, self.resize)

    def head(self, n: int) -> "DatasetSplit":
        return self.subset(slice(0, n)) if n is not None and n < len(self) else self


def load_split(data_dir: str, split: str, resize: str = "pad") -> DatasetSplit:
    """Load an MNIST split from standard IDX files (.gz variants accepted)."""
    if split not in _SPLIT_FILES:
        raise ValueError(f"unknown split {split!r}")
    paths = []
    for name in _SPLIT_FILES[split]:
        path = os.path.join(data_dir, name)
        if not os.path.exists(path) and os.path.exists(path + ".gz"):
            path += ".gz"
        if not os.path.exists(path):
            raise FileNotFoundError(f"missing IDX file {path} (or .gz)")
        paths.append(path)
    images = load_idx_images(paths[0])
    labels = load_idx_labels(paths[1])
    return DatasetSplit(images, labels, split, resize)


def build_reduced_dataset(split: DatasetSplit, per_class: int = 640) -> DatasetSplit:
    """First `per_class` zeros then first `per_class` ones, in dataset order."""
    zeros = np.nonzero(split.labels == 0)[0][:per_class]
    ones = np.nonzero(split.labels == 1)[0][:per_class]
    if len(zeros) < per_class or len(ones) < per_class:
        raise ValueError(
            f"need {per_class} zeros and ones, found {len(zeros)} and {len(ones)}"
        )
    return split.subset(np.concatenate([zeros, ones]))


@dataclass
class MeasurementDataset:
    """Masked measurement features, labels, and optional reconstruction targets."""

    features: np.ndarray
    labels: np.ndarray
    mask: SelectionMask
    targets: np.ndarray | None = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.uint8)
        if self.features.ndim != 2 or self.features.shape[0] != self.labels.shape[0]:
            raise DimensionError("features and labels row counts differ")
        if self.features.shape[1] != self.mask.m:
            raise DimensionError(
                f"feature width {self.features.shape[1]} != mask size {self.mask.m}"
            )
        if self.targets is not None:
            self.targets = np.asarray(self.targets, dtype=np.float64)
            if self.targets.shape[0] != self.features.shape[0]:
                raise DimensionError("targets row count differs from features")

    def __len__(self) -> int:
        return self.features.shape[0]


def build_measurement_dataset(split: DatasetSplit, mask: SelectionMask,
                              with_targets: bool = False,
                              chunk_size: int = 4096) -> MeasurementDataset:
    """Measure every image and keep the masked coefficients (chunked FWHT)."""
    if mask.order != HadamardOrder(SIDE):
        raise DimensionError("mask order does not match 32x32 objects")
    n = len(split)
    features = np.empty((n, mask.m))
    targets = np.empty((n, SIDE * SIDE)) if with_targets else None
    for start in range(0, n, chunk_size):
        stop = min(start + chunk_size, n)
        pixels = preprocess_batch(split.raw_images[start:stop], split.resize)
        features[start:stop] = fwht(pixels)[:, mask.indices]
        if with_targets:
            targets[start:stop] = pixels
    return MeasurementDataset(features, split.labels.copy(), mask, targets)


def dataset_variances(split: DatasetSplit, chunk_size: int = 4096) -> np.ndarray:
    """Per-index population variance of full measurements, chunked two-pass.

    Chunks reduce in ascending index order, so the result does not depend on
    chunk size or worker scheduling.
    """
    n = len(split)
    if n == 0:
        raise ValueError("dataset must be nonempty")
    total = np.zeros(SIDE * SIDE)
    for start in range(0, n, chunk_size):
        pixels = preprocess_batch(split.raw_images[start : start + chunk_size], split.resize)
        total += fwht(pixels).sum(axis=0)
    mean = total / n
    sq = np.zeros(SIDE * SIDE)
    for start in range(0, n, chunk_size):
        pixels = preprocess_batch(split.raw_images[start : start + chunk_size], split.resize)
        sq += ((fwht(pixels) - mean) ** 2).sum(axis=0)
    return sq / n


# ---------------------------------------------------------------------------
# .spqm measurement cache: little-endian binary, bit-exact round trip.
#
#   b'SPQM' | version u32 | n_rows u32 | n_features u32 | n_target_cols u32
#   | n_total u32 | m u32 | indices i64[m] | variances f64[m]
#   | labels u8[n_rows] | features f64[n_rows*n_features]
#   | targets f64[n_rows*n_target_cols]
# ---------------------------------------------------------------------------

SPQM_MAGIC = b"SPQM"
SPQM_VERSION = 1


def save_measurement_dataset(path: str, ds: MeasurementDataset) -> None:
    n_rows, m = ds.features.shape
    n_targets = 0 if ds.targets is None else ds.targets.shape[1]
    with open(path, "wb") as f:
        f.write(SPQM_MAGIC)
        f.write(struct.pack("<IIIIII", SPQM_VERSION, n_rows, m, n_targets,
                            ds.mask.order.n_total, ds.mask.m))
        f.write(ds.mask.indices.astype("<i8").tobytes())
        f.write(ds.mask.variances.astype("<f8").tobytes())
        f.write(ds.labels.astype(np.uint8).tobytes())
        f.write(ds.features.astype("<f8").tobytes())
        if ds.targets is not None:
            f.write(ds.targets.astype("<f8").tobytes())


def load_measurement_dataset(path: str) -> MeasurementDataset:
    with open(path, "rb") as f:
        magic = _read_exact(f, 4, 0, "magic")
        if magic != SPQM_MAGIC:
            raise DataFormatError(f"bad cache magic {magic!r} at offset 0")
        version, n_rows, m, n_targets, n_total, mask_m = struct.unpack(
            "<IIIIII", _read_exact(f, 24, 4, "header")
        )
        if version != SPQM_VERSION:
            raise DataFormatError(f"unsupported cache version {version}")
        if mask_m != m:
            raise DataFormatError("cache mask size does not match feature width")
        offset = 28
        indices = np.frombuffer(_read_exact(f, 8 * m, offset, "mask indices"), dtype="<i8")
        offset += 8 * m
        variances = np.frombuffer(_read_exact(f, 8 * m, offset, "mask variances"), dtype="<f8")
        offset += 8 * m
        labels = np.frombuffer(_read_exact(f, n_rows, offset, "labels"), dtype=np.uint8)
        offset += n_rows
        features = np.frombuffer(
            _read_exact(f, 8 * n_rows * m, offset, "features"), dtype="<f8"
        ).reshape(n_rows, m)
        offset += 8 * n_rows * m
        targets = None
        if n_targets:
            targets = np.frombuffer(
                _read_exact(f, 8 * n_rows * n_targets, offset, "targets"), dtype="<f8"
            ).reshape(n_rows, n_targets)
    side = int(round(n_total ** 0.5))
    mask = SelectionMask(HadamardOrder(side), indices, variances)
    return MeasurementDataset(features, labels, mask, targets)
