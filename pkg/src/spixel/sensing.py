"""Hadamard-basis sensing: patterns, single-pixel measurements, inversion, selection.

Patterns are rows of the Sylvester-ordered (natural/Kronecker) Hadamard matrix
H_N with entries H[i, j] = (-1)^popcount(i & j), N a power of two.  The raw
matrix satisfies H @ H.T = N * I, so the inverse transform divides by N.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class HadamardOrder:
    """Pattern geometry: a side-by-side image measured with side**2 patterns."""

    n_pixels_side: int

    def __post_init__(self):
        side = self.n_pixels_side
        if side < 2 or not _is_pow2(side):
            raise DimensionError(f"side must be a power of two >= 2, got {side}")

    @property
    def n_total(self) -> int:
        return self.n_pixels_side ** 2


@dataclass(frozen=True)
class ImageObject:
    """A side x side grayscale object, pixels in [0, 1], flattened row-major."""

    side: int
    pixels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pixels", np.asarray(self.pixels, dtype=np.float64))
        if self.pixels.shape != (self.side * self.side,):
            raise DimensionError(
                f"expected {self.side * self.side} pixels, got shape {self.pixels.shape}"
            )
        if not np.all(np.isfinite(self.pixels)):
            raise ValueError("pixels must be finite")
        if self.pixels.min(initial=0.0) < 0.0 or self.pixels.max(initial=0.0) > 1.0:
            raise ValueError("pixels must lie in [0, 1]")

    @property
    def order(self) -> HadamardOrder:
        return HadamardOrder(self.side)

    def as_2d(self) -> np.ndarray:
        return self.pixels.reshape(self.side, self.side)


@dataclass(frozen=True)
class MeasurementVector:
    """Hadamard coefficients of one object, full or restricted to an index set."""

    order: HadamardOrder
    values: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=np.int64))
        if self.values.shape != self.indices.shape or self.values.ndim != 1:
            raise DimensionError("values and indices must be 1-D and the same length")
        _check_index_set(self.indices, self.order.n_total)

    @property
    def is_full(self) -> bool:
        return len(self.indices) == self.order.n_total


@dataclass(frozen=True)
class SelectionMask:
    """Kept measurement indices plus the training-set variance of each."""

    order: HadamardOrder
    indices: np.ndarray
    variances: np.ndarray = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=np.int64))
        if self.variances is None:
            object.__setattr__(self, "variances", np.zeros(len(self.indices)))
        object.__setattr__(self, "variances", np.asarray(self.variances, dtype=np.float64))
        _check_index_set(self.indices, self.order.n_total)
        if self.variances.shape != self.indices.shape:
            raise DimensionError("variances must align with indices")
        if np.any(self.variances < 0):
            raise ValueError("variances must be nonnegative")

    @property
    def m(self) -> int:
        return len(self.indices)


def _check_index_set(indices: np.ndarray, n_total: int) -> None:
    if len(indices) == 0:
        raise ValueError("index set must be nonempty")
    if indices.min() < 0 or indices.max() >= n_total:
        raise DimensionError(f"indices must lie in [0, {n_total})")
    if np.any(np.diff(indices) <= 0):
        raise ValueError("indices must be strictly increasing")


def full_mask(order: HadamardOrder) -> SelectionMask:
    return SelectionMask(order, np.arange(order.n_total))


def _n_total_of(order) -> int:
    n = order.n_total if isinstance(order, HadamardOrder) else int(order)
    if not _is_pow2(n):
        raise DimensionError(f"transform length must be a power of two, got {n}")
    return n


def hadamard_row(order: HadamardOrder | int, i: int) -> np.ndarray:
    """Row i of H_N as a float vector of +/-1; entry j is (-1)^popcount(i & j)."""
    n = _n_total_of(order)
    if not 0 <= i < n:
        raise IndexError(f"row index {i} out of range for N={n}")
    parity = np.bitwise_count(np.bitwise_and(np.arange(n, dtype=np.int64), i)) & 1
    return 1.0 - 2.0 * parity.astype(np.float64)


def fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform along the last axis, O(N log N).

    Accepts a single vector or a batch stacked on leading axes; equals
    multiplication by the Sylvester-ordered H_N.
    """
    a = np.array(values, dtype=np.float64)
    n = a.shape[-1]
    if not _is_pow2(n):
        raise DimensionError(f"transform length must be a power of two, got {n}")
    shape = a.shape
    a = a.reshape(-1, n)
    h = 1
    while h < n:
        a = a.reshape(a.shape[0], -1, 2, h)
        x, y = a[:, :, 0, :], a[:, :, 1, :]
        a = np.stack((x + y, x - y), axis=2)
        h *= 2
    return a.reshape(shape)


def measure_full(obj: ImageObject) -> MeasurementVector:
    """All n_total single-pixel measurements M_i = <row_i, pixels> via the FWHT."""
    order = obj.order
    return MeasurementVector(order, fwht(obj.pixels), np.arange(order.n_total))


def reconstruct_linear(measurements: MeasurementVector) -> np.ndarray:
    """Linear inverse (1/N) * sum_i values[i] * row_i, flattened row-major.

    Missing coefficients are treated as zero, so subsampled measurements give
    the zero-filled back-projection.  Values are not clamped to [0, 1].
    """
    n = measurements.order.n_total
    coeff = np.zeros(n)
    coeff[measurements.indices] = measurements.values
    return fwht(coeff) / n


def population_variance(rows: np.ndarray) -> np.ndarray:
    """Per-column population variance (divide by N), two-pass for stability."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise ValueError("need a nonempty 2-D array of measurement rows")
    mean = rows.mean(axis=0)
    return np.mean((rows - mean) ** 2, axis=0)


def mask_from_variances(order: HadamardOrder, variances: np.ndarray, m: int) -> SelectionMask:
    """Keep the m largest-variance indices; ties broken by smaller index."""
    variances = np.asarray(variances, dtype=np.float64)
    n = order.n_total
    if variances.shape != (n,):
        raise DimensionError(f"expected {n} variances, got shape {variances.shape}")
    if not 1 <= m <= n:
        raise ValueError(f"m must be in [1, {n}], got {m}")
    # lexsort: primary key descending variance, secondary ascending index
    ranked = np.lexsort((np.arange(n), -variances))[:m]
    keep = np.sort(ranked)
    return SelectionMask(order, keep, variances[keep])


def select_top_variance(dataset_measurements, m: int) -> SelectionMask:
    """Select the m highest-variance measurement indices across a dataset.

    Accepts a sequence of full MeasurementVector records or an (N, n_total)
    array of full measurement rows.
    """
    if isinstance(dataset_measurements, np.ndarray):
        rows = dataset_measurements
        order = HadamardOrder(int(round(rows.shape[1] ** 0.5)))
    else:
        vectors = list(dataset_measurements)
        if not vectors:
            raise ValueError("dataset must be nonempty")
        order = vectors[0].order
        for v in vectors:
            if v.order != order:
                raise DimensionError("all measurement vectors must share one order")
            if not v.is_full:
                raise ValueError("variance selection needs full measurement vectors")
        rows = np.stack([v.values for v in vectors])
    if rows.shape[1] != order.n_total:
        raise DimensionError("rows are not full measurement vectors")
    return mask_from_variances(order, population_variance(rows), m)


def apply_mask(full: MeasurementVector, mask: SelectionMask) -> MeasurementVector:
    """Restrict a full measurement vector to the mask's index set."""
    if full.order != mask.order:
        raise DimensionError("measurement order does not match mask order")
    if not full.is_full:
        raise ValueError("apply_mask needs a full measurement vector")
    return MeasurementVector(mask.order, full.values[mask.indices], mask.indices.copy())


def export_pattern_image(order: HadamardOrder, i: int) -> np.ndarray:
    """Pattern i as a side x side array of +/-1 (row reshaped row-major)."""
    side = order.n_pixels_side
    return hadamard_row(order, i).reshape(side, side)
