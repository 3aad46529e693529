"""Deterministic MNIST-shaped stand-in corpus for environments without the
real IDX files.

Digits are rendered from the TTF fonts bundled with matplotlib, jittered in
size, position, rotation and shear, lightly blurred, and written as standard
IDX files (same magics, dims, and byte layout as MNIST).  Generation is
seeded, so repeated runs produce byte-identical corpora; a corpus is cached
on disk keyed by its parameters.
"""

from __future__ import annotations

import glob
import os
import struct

import numpy as np
from PIL import Image, ImageDraw, ImageFilter, ImageFont

_FONT_NAMES = [
    "DejaVuSans.ttf",
    "DejaVuSans-Bold.ttf",
    "DejaVuSans-Oblique.ttf",
    "DejaVuSans-BoldOblique.ttf",
    "DejaVuSerif.ttf",
    "DejaVuSerif-Bold.ttf",
    "DejaVuSerif-Italic.ttf",
    "DejaVuSerif-BoldItalic.ttf",
    "DejaVuSansMono.ttf",
    "DejaVuSansMono-Bold.ttf",
    "DejaVuSansMono-Oblique.ttf",
    "DejaVuSansMono-BoldOblique.ttf",
]


def _font_paths() -> list[str]:
    import matplotlib

    root = os.path.join(os.path.dirname(matplotlib.__file__), "mpl-data", "fonts", "ttf")
    paths = [os.path.join(root, name) for name in _FONT_NAMES]
    return [p for p in paths if os.path.exists(p)] or sorted(glob.glob(os.path.join(root, "*.ttf")))


_FONT_CACHE: dict[tuple[str, int], ImageFont.FreeTypeFont] = {}


def _font(path: str, size: int) -> ImageFont.FreeTypeFont:
    key = (path, size)
    if key not in _FONT_CACHE:
        _FONT_CACHE[key] = ImageFont.truetype(path, size)
    return _FONT_CACHE[key]


def render_digit(digit: int, rng: np.random.Generator, fonts: list[str]) -> np.ndarray:
    """One 28x28 uint8 glyph image, white-on-black like MNIST."""
    size = int(rng.integers(17, 26))
    font = _font(fonts[int(rng.integers(len(fonts)))], size)
    canvas = Image.new("L", (48, 48), 0)
    draw = ImageDraw.Draw(canvas)
    dx, dy = rng.uniform(-2.0, 2.0, size=2)
    draw.text((24 + dx, 24 + dy), str(digit), fill=255, font=font, anchor="mm")
    angle = rng.uniform(-16.0, 16.0)
    shear = rng.uniform(-0.25, 0.25)
    canvas = canvas.rotate(angle, resample=Image.BILINEAR, center=(24, 24))
    canvas = canvas.transform(
        (48, 48), Image.AFFINE, (1.0, shear, -shear * 24, 0.0, 1.0, 0.0),
        resample=Image.BILINEAR,
    )
    canvas = canvas.filter(ImageFilter.GaussianBlur(rng.uniform(0.4, 1.0)))
    arr = np.asarray(canvas, dtype=np.float64)
    peak = arr.max()
    if peak > 0:
        arr = arr * (rng.uniform(200.0, 255.0) / peak)
    jx, jy = rng.integers(-2, 3, size=2)
    crop = arr[10 + jy : 38 + jy, 10 + jx : 38 + jx]
    return np.clip(np.round(crop), 0, 255).astype(np.uint8)


def render_corpus(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    fonts = _font_paths()
    labels = rng.integers(0, 10, size=n).astype(np.uint8)
    images = np.empty((n, 28 * 28), dtype=np.uint8)
    for i in range(n):
        images[i] = render_digit(int(labels[i]), rng, fonts).reshape(-1)
    return images, labels


def write_idx_images(path: str, images: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, images.shape[0], 28, 28))
        f.write(np.ascontiguousarray(images, dtype=np.uint8).tobytes())


def write_idx_labels(path: str, labels: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, labels.shape[0]))
        f.write(np.ascontiguousarray(labels, dtype=np.uint8).tobytes())


def ensure_corpus(root: str, n_train: int, n_test: int, seed: int = 0) -> str:
    """Create (or reuse) a synthetic IDX corpus; returns its directory."""
    out = os.path.join(root, f"synth-{n_train}-{n_test}-{seed}")
    marker = os.path.join(out, ".complete")
    if os.path.exists(marker):
        return out
    os.makedirs(out, exist_ok=True)
    train_images, train_labels = render_corpus(n_train, seed)
    test_images, test_labels = render_corpus(n_test, seed + 1)
    write_idx_images(os.path.join(out, "train-images-idx3-ubyte"), train_images)
    write_idx_labels(os.path.join(out, "train-labels-idx1-ubyte"), train_labels)
    write_idx_images(os.path.join(out, "t10k-images-idx3-ubyte"), test_images)
    write_idx_labels(os.path.join(out, "t10k-labels-idx1-ubyte"), test_labels)
    with open(marker, "w") as f:
        f.write("ok\n")
    return out
