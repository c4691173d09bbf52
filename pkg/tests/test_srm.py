import numpy as np
import pytest

from stegkit import srm
from oracles import naive_correlate


class TestFilterBank:
    def test_bank_size(self):
        assert len(srm.filter_bank()) == 30

    def test_kernels_sum_to_zero(self):
        for k in srm.filter_bank():
            assert k.numerator.sum() == 0

    def test_uniform_5x5_frames(self):
        for k in srm.filter_bank():
            assert k.numerator.shape == (5, 5)
            assert k.divisor >= 1

    def test_known_kernels_present(self):
        by_name = {k.name: k for k in srm.filter_bank()}
        kb = by_name["square_3x3"]
        assert kb.divisor == 4
        assert kb.numerator[1:4, 1:4].tolist() == [[-1, 2, -1], [2, -4, 2], [-1, 2, -1]]
        second = by_name["second_order_0_1"]
        assert second.divisor == 2
        assert second.numerator[2, 1:4].tolist() == [1, -2, 1]

    def test_kernels_distinct(self):
        mats = [k.numerator.tobytes() for k in srm.filter_bank()]
        assert len(set(mats)) == 30


class TestResiduals:
    def test_constant_image_zero(self):
        out = srm.residuals(np.full((12, 12), 77, dtype=np.uint8))
        assert np.abs(out).max() == 0.0

    def test_impulse_response(self):
        img = np.zeros((11, 11))
        img[5, 5] = 1.0
        out = srm.residuals(img)
        for plane, k in zip(out, srm.filter_bank()):
            flipped = k.coefficients[::-1, ::-1]
            assert np.allclose(plane[3:8, 3:8], flipped)

    def test_matches_naive_oracle_exactly(self):
        rng = np.random.default_rng(9)
        img = rng.integers(0, 256, (16, 16)).astype(np.float64)
        out = srm.residuals(img)
        for plane, k in zip(out, srm.filter_bank()):
            ref = naive_correlate(img, k.numerator, k.divisor)
            assert np.array_equal(plane, ref)

    def test_linearity(self):
        rng = np.random.default_rng(10)
        x = rng.normal(size=(10, 10))
        y = rng.normal(size=(10, 10))
        combo = srm.residuals(2.0 * x + 3.0 * y)
        assert np.allclose(combo, 2.0 * srm.residuals(x) + 3.0 * srm.residuals(y))

    def test_translation_equivariance_interior(self):
        img = np.zeros((20, 20))
        img[8, 8] = 1.0
        shifted = np.zeros((20, 20))
        shifted[9, 11] = 1.0
        a = srm.residuals(img)
        b = srm.residuals(shifted)
        assert np.allclose(a[:, 5:12, 5:12], b[:, 6:13, 8:15])

    def test_undersized_rejected(self):
        with pytest.raises(ValueError):
            srm.residuals(np.zeros((4, 6)))


class TestScaResiduals:
    def test_nonnegative(self):
        pm = np.random.default_rng(11).random((16, 16)) * 0.5
        assert srm.sca_residuals(pm).min() >= 0.0

    def test_constant_map_interior_response(self):
        c = 0.3
        out = srm.sca_residuals(np.full((12, 12), c))
        for plane, k in zip(out, srm.filter_bank()):
            expected = c * np.abs(k.coefficients).sum()
            assert np.allclose(plane[2:-2, 2:-2], expected)

    def test_matches_naive_oracle_exactly(self):
        rng = np.random.default_rng(12)
        pm = rng.random((16, 16)) * 0.5
        out = srm.sca_residuals(pm)
        for plane, k in zip(out, srm.filter_bank()):
            ref = naive_correlate(pm, np.abs(k.numerator), k.divisor)
            assert np.array_equal(plane, ref)

    def test_monotone_in_map(self):
        rng = np.random.default_rng(13)
        pm = rng.random((10, 10)) * 0.4
        base = srm.sca_residuals(pm)
        bumped = pm.copy()
        bumped[4, 4] += 0.05
        assert (srm.sca_residuals(bumped) >= base - 1e-15).all()


class TestKernelTable:
    def test_export_parses_back(self):
        text = srm.export_kernel_table()
        blocks = [b for b in text.split("\n\n") if b.strip()]
        assert len(blocks) == 30
        for block, k in zip(blocks, srm.filter_bank()):
            lines = block.splitlines()
            header = lines[0].split()
            assert header[0] == "kernel"
            assert header[2] == k.name
            assert int(header[3].split("=")[1]) == k.divisor
            mat = np.array([[int(v) for v in row.split()] for row in lines[1:6]])
            assert np.array_equal(mat, k.numerator)
