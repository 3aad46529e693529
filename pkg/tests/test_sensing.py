import numpy as np
import pytest

from spixel.errors import DimensionError
from spixel.sensing import (
    HadamardOrder,
    ImageObject,
    MeasurementVector,
    SelectionMask,
    apply_mask,
    export_pattern_image,
    full_mask,
    fwht,
    hadamard_row,
    measure_full,
    population_variance,
    reconstruct_linear,
    select_top_variance,
)


def kron_hadamard(n: int) -> np.ndarray:
    """Oracle: H_n by literal Kronecker recursion H_2 (x) H_{n/2}."""
    h2 = np.array([[1.0, 1.0], [1.0, -1.0]])
    h = np.array([[1.0]])
    while h.shape[0] < n:
        h = np.kron(h2, h)
    return h


def random_image(side: int, rng) -> ImageObject:
    return ImageObject(side, rng.random(side * side))


class TestHadamardRow:
    def test_first_row_all_ones(self):
        assert np.array_equal(hadamard_row(4, 0), np.ones(4))

    def test_h2_second_row(self):
        assert np.array_equal(hadamard_row(2, 1), [1.0, -1.0])

    def test_kron_oracle_row(self):
        # H_4 = H_2 (x) H_2 computed by brute force
        assert np.array_equal(hadamard_row(4, 3), kron_hadamard(4)[3])

    @pytest.mark.parametrize("n", [2, 4, 16, 64])
    def test_all_rows_match_kron_oracle(self, n):
        oracle = kron_hadamard(n)
        rows = np.stack([hadamard_row(n, i) for i in range(n)])
        assert np.array_equal(rows, oracle)

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            hadamard_row(4, 4)
        with pytest.raises(IndexError):
            hadamard_row(4, -1)

    def test_accepts_order_object(self):
        order = HadamardOrder(2)
        assert np.array_equal(hadamard_row(order, 0), np.ones(4))

    @pytest.mark.parametrize("n", [4, 16, 64, 256])
    def test_orthogonality(self, n):
        h = np.stack([hadamard_row(n, i) for i in range(n)])
        assert np.array_equal(h @ h.T, n * np.eye(n))


class TestFwht:
    @pytest.mark.parametrize("n", [4, 16, 64, 1024])
    def test_matches_naive_transform(self, n):
        rng = np.random.default_rng(7)
        h = kron_hadamard(n)
        x = rng.normal(size=(100, n))
        naive = x @ h.T
        fast = fwht(x)
        scale = np.maximum(np.abs(naive), 1.0)
        assert np.max(np.abs(fast - naive) / scale) < 1e-12

    def test_non_power_of_two(self):
        with pytest.raises(DimensionError):
            fwht(np.ones(12))


class TestMeasureFull:
    def test_constant_object(self):
        c = 0.37
        obj = ImageObject(4, np.full(16, c))
        mv = measure_full(obj)
        assert mv.values[0] == pytest.approx(16 * c)
        assert np.allclose(mv.values[1:], 0.0)
        assert np.array_equal(mv.indices, np.arange(16))

    def test_zero_object(self):
        mv = measure_full(ImageObject(4, np.zeros(16)))
        assert np.array_equal(mv.values, np.zeros(16))

    def test_unit_impulse_4_pixels(self):
        # H_4 @ e_0 is the first column: all ones
        mv = measure_full(ImageObject(2, np.array([1.0, 0.0, 0.0, 0.0])))
        assert np.array_equal(mv.values, np.ones(4))

    def test_parseval(self):
        rng = np.random.default_rng(3)
        obj = random_image(8, rng)
        mv = measure_full(obj)
        assert np.sum(mv.values ** 2) == pytest.approx(64 * np.sum(obj.pixels ** 2))


class TestReconstructLinear:
    def test_round_trip_exact(self):
        rng = np.random.default_rng(11)
        obj = random_image(32, rng)
        rec = reconstruct_linear(measure_full(obj))
        assert np.max(np.abs(rec - obj.pixels)) < 1e-10

    def test_round_trip_16_pixels(self):
        rng = np.random.default_rng(5)
        obj = random_image(4, rng)
        rec = reconstruct_linear(measure_full(obj))
        assert np.max(np.abs(rec - obj.pixels)) < 1e-10

    def test_single_dc_coefficient(self):
        c = 0.25
        mv = MeasurementVector(HadamardOrder(4), np.array([16 * c]), np.array([0]))
        assert np.allclose(reconstruct_linear(mv), c)


class TestSelectTopVariance:
    def test_single_differing_index(self):
        base = np.zeros(16)
        other = base.copy()
        other[7] = 2.0
        order = HadamardOrder(4)
        vectors = [
            MeasurementVector(order, base, np.arange(16)),
            MeasurementVector(order, other, np.arange(16)),
        ]
        mask = select_top_variance(vectors, 1)
        assert mask.indices.tolist() == [7]

    def test_tie_break_by_index(self):
        order = HadamardOrder(4)
        vectors = [MeasurementVector(order, np.ones(16), np.arange(16))] * 3
        mask = select_top_variance(vectors, 3)
        assert mask.indices.tolist() == [0, 1, 2]
        assert np.allclose(mask.variances, 0.0)

    def test_matches_bruteforce_sort(self):
        rng = np.random.default_rng(19)
        rows = rng.normal(size=(100, 16))
        mask = select_top_variance(rows, 4)
        # oracle: two-pass variance then stable sort on (-variance, index)
        var = np.array([np.mean((rows[:, j] - rows[:, j].mean()) ** 2) for j in range(16)])
        expect = sorted(sorted(range(16), key=lambda j: (-var[j], j))[:4])
        assert mask.indices.tolist() == expect
        assert np.allclose(mask.variances, var[expect], rtol=0, atol=1e-12)

    def test_order_invariance(self):
        rng = np.random.default_rng(23)
        rows = rng.normal(size=(50, 16))
        mask_a = select_top_variance(rows, 5)
        mask_b = select_top_variance(rows[::-1].copy(), 5)
        assert np.array_equal(mask_a.indices, mask_b.indices)
        assert np.allclose(mask_a.variances, mask_b.variances, atol=1e-12)

    def test_m_too_large(self):
        rows = np.ones((3, 16))
        with pytest.raises(ValueError):
            select_top_variance(rows, 17)

    def test_empty_dataset(self):
        with pytest.raises(ValueError):
            select_top_variance([], 1)


class TestApplyMask:
    def test_full_mask_is_identity(self):
        rng = np.random.default_rng(2)
        mv = measure_full(random_image(4, rng))
        out = apply_mask(mv, full_mask(HadamardOrder(4)))
        assert np.array_equal(out.values, mv.values)

    def test_dc_only_constant_image(self):
        c = 0.5
        mv = measure_full(ImageObject(4, np.full(16, c)))
        mask = SelectionMask(HadamardOrder(4), np.array([0]))
        out = apply_mask(mv, mask)
        assert out.values.tolist() == [pytest.approx(16 * c)]

    def test_gather_matches_direct_indexing(self):
        rng = np.random.default_rng(41)
        mv = measure_full(random_image(4, rng))
        mask = SelectionMask(HadamardOrder(4), np.array([2, 5, 11]))
        out = apply_mask(mv, mask)
        assert np.array_equal(out.values, mv.values[[2, 5, 11]])
        assert np.array_equal(out.indices, [2, 5, 11])

    def test_order_mismatch(self):
        rng = np.random.default_rng(2)
        mv = measure_full(random_image(4, rng))
        with pytest.raises(DimensionError):
            apply_mask(mv, full_mask(HadamardOrder(8)))


class TestExportPatternImage:
    def test_all_white_first_pattern(self):
        assert np.array_equal(export_pattern_image(HadamardOrder(2), 0), np.ones((2, 2)))

    def test_reshape_of_kron_row(self):
        # row 1 of H_4 is [1,-1,1,-1], reshaped row-major
        pattern = export_pattern_image(HadamardOrder(2), 1)
        assert np.array_equal(pattern, [[1.0, -1.0], [1.0, -1.0]])

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            export_pattern_image(HadamardOrder(2), 4)


class TestInvariantsAndTypes:
    def test_population_variance_divides_by_n(self):
        rows = np.array([[0.0], [2.0]])
        assert population_variance(rows)[0] == pytest.approx(1.0)  # not 2.0 (sample)

    def test_image_object_validation(self):
        with pytest.raises(DimensionError):
            ImageObject(4, np.zeros(15))
        with pytest.raises(ValueError):
            ImageObject(2, np.array([0.0, 0.5, 1.0, 1.5]))
        with pytest.raises(ValueError):
            ImageObject(2, np.array([0.0, 0.5, np.nan, 1.0]))

    def test_order_validation(self):
        with pytest.raises(DimensionError):
            HadamardOrder(12)
        with pytest.raises(DimensionError):
            HadamardOrder(1)

    def test_measurement_vector_invariants(self):
        order = HadamardOrder(2)
        with pytest.raises(ValueError):
            MeasurementVector(order, np.ones(2), np.array([1, 1]))
        with pytest.raises(DimensionError):
            MeasurementVector(order, np.ones(2), np.array([3, 4]))
        assert MeasurementVector(order, np.ones(4), np.arange(4)).is_full

    def test_mask_variance_nonnegative(self):
        with pytest.raises(ValueError):
            SelectionMask(HadamardOrder(2), np.array([0]), np.array([-1.0]))
