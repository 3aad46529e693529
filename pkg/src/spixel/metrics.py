"""Accuracy, MSE aggregation, and windowed SSIM for reconstruction quality.

SSIM uses the common defaults (11x11 Gaussian window, sigma 1.5, k1=0.01,
k2=0.03, data range 1.0); model outputs must be min-max rescaled into [0, 1]
by the caller (dataset_ssim does this) since simplex-normalized quantum
outputs would otherwise score near zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .errors import DimensionError


@dataclass(frozen=True)
class SsimConfig:
    window_size: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    data_range: float = 1.0

    def __post_init__(self):
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("k1 and k2 must be positive")


def accuracy(predicted: np.ndarray, true_labels: np.ndarray) -> float:
    predicted = np.asarray(predicted)
    true_labels = np.asarray(true_labels)
    if predicted.shape != true_labels.shape:
        raise DimensionError("label arrays must have the same shape")
    return float(np.mean(predicted == true_labels))


def gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    """2-D Gaussian weights normalized to sum 1."""
    half = (size - 1) / 2.0
    coords = np.arange(size) - half
    g = np.exp(-(coords ** 2) / (2.0 * sigma ** 2))
    window = np.outer(g, g)
    return window / window.sum()


def _as_square(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 1:
        side = int(round(np.sqrt(img.size)))
        if side * side != img.size:
            raise DimensionError(f"cannot reshape {img.size} pixels to a square")
        img = img.reshape(side, side)
    if img.ndim != 2:
        raise DimensionError(f"expected a 2-D image, got shape {img.shape}")
    return img


def ssim(image_a: np.ndarray, image_b: np.ndarray,
         config: SsimConfig = SsimConfig()) -> float:
    """Mean local SSIM over all valid windows of two same-shape images."""
    a = _as_square(image_a)
    b = _as_square(image_b)
    if a.shape != b.shape:
        raise DimensionError(f"image shapes differ: {a.shape} vs {b.shape}")
    window = gaussian_window(config.window_size, config.sigma)
    c1 = (config.k1 * config.data_range) ** 2
    c2 = (config.k2 * config.data_range) ** 2
    # symmetric window, so convolution equals correlation
    mu_a = convolve2d(a, window, mode="valid")
    mu_b = convolve2d(b, window, mode="valid")
    var_a = convolve2d(a * a, window, mode="valid") - mu_a * mu_a
    var_b = convolve2d(b * b, window, mode="valid") - mu_b * mu_b
    cov = convolve2d(a * b, window, mode="valid") - mu_a * mu_b
    ssim_map = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / (
        (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    )
    return float(ssim_map.mean())


def minmax_rescale(img: np.ndarray) -> np.ndarray:
    """Affine rescale to [0, 1]; a constant image maps to all zeros."""
    img = np.asarray(img, dtype=np.float64)
    lo, hi = img.min(), img.max()
    if hi == lo:
        return np.zeros_like(img)
    return (img - lo) / (hi - lo)


def dataset_ssim(model_outputs: np.ndarray, targets: np.ndarray,
                 config: SsimConfig = SsimConfig()) -> float:
    """Mean SSIM over pairs, min-max rescaling each model output first."""
    model_outputs = np.atleast_2d(np.asarray(model_outputs, dtype=np.float64))
    targets = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    if model_outputs.shape != targets.shape:
        raise DimensionError("outputs and targets must align")
    values = [
        ssim(minmax_rescale(out), tgt, config)
        for out, tgt in zip(model_outputs, targets)
    ]
    return float(np.mean(values))
