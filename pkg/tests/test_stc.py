import numpy as np
import pytest

from stegkit import stc
from stegkit.errors import InfeasibleError
from stegkit.io import WET_COST
from oracles import brute_force_min_cost, inverse_binary_entropy


def random_instance(rng, n_max=12, h_max=3):
    h = int(rng.integers(2, h_max + 1))
    m = int(rng.integers(2, 5))
    n = int(rng.integers(m, n_max + 1))
    params = stc.StcParams(stc.make_sub_matrix(h, max(1, n // m)), m)
    x = rng.integers(0, 2, n).astype(np.uint8)
    msg = rng.integers(0, 2, m).astype(np.uint8)
    costs = rng.random(n) + 0.01
    return params, x, msg, costs


class TestParams:
    def test_height_bounds(self):
        with pytest.raises(ValueError):
            stc.StcParams(np.ones((1, 2), dtype=np.uint8), 4)
        with pytest.raises(ValueError):
            stc.StcParams(np.ones((13, 2), dtype=np.uint8), 4)

    def test_connectivity_rows(self):
        bad = np.ones((3, 2), dtype=np.uint8)
        bad[0] = 0
        with pytest.raises(ValueError):
            stc.StcParams(bad, 4)

    def test_make_sub_matrix_deterministic(self):
        assert np.array_equal(stc.make_sub_matrix(7, 4), stc.make_sub_matrix(7, 4))
        m = stc.make_sub_matrix(5, 3)
        assert m[0].any() and m[-1].any()
        assert all(col.any() for col in m.T)


class TestEmbedExtract:
    def test_zero_distortion_when_syndrome_matches(self):
        rng = np.random.default_rng(20)
        params, x, _, costs = random_instance(rng)
        msg = stc.stc_extract(x, params)
        y, total = stc.stc_embed(x, costs, msg, params)
        assert np.array_equal(y, x)
        assert total == 0.0

    def test_small_instance_matches_brute_force(self):
        rng = np.random.default_rng(21)
        params = stc.StcParams(np.array([[1, 0], [1, 1]], dtype=np.uint8), 4)
        n = 8
        H = stc.build_parity_check(params, n)
        for _ in range(25):
            x = rng.integers(0, 2, n).astype(np.uint8)
            msg = rng.integers(0, 2, 4).astype(np.uint8)
            costs = rng.random(n)
            y, total = stc.stc_embed(x, costs, msg, params)
            best, _ = brute_force_min_cost(H, x, costs, msg)
            assert total == pytest.approx(best, abs=1e-12)
            assert np.array_equal((H @ y) % 2, msg)

    def test_random_instances_optimal(self):
        rng = np.random.default_rng(22)
        for _ in range(50):
            params, x, msg, costs = random_instance(rng)
            H = stc.build_parity_check(params, x.size)
            y, total = stc.stc_embed(x, costs, msg, params)
            best, _ = brute_force_min_cost(H, x, costs, msg)
            assert total == pytest.approx(best, abs=1e-12)
            assert np.array_equal((H @ y) % 2, msg)

    def test_extract_inverts_embed(self):
        rng = np.random.default_rng(23)
        for _ in range(200):
            params, x, msg, costs = random_instance(rng, n_max=40, h_max=6)
            y, _ = stc.stc_embed(x, costs, msg, params)
            assert np.array_equal(stc.stc_extract(y, params), msg)

    def test_zero_stego_zero_message(self):
        params = stc.default_params(32, 8)
        assert not stc.stc_extract(np.zeros(32, dtype=np.uint8), params).any()

    def test_single_flip_changes_syndrome(self):
        params = stc.default_params(16, 4, h=3)
        y = np.zeros(16, dtype=np.uint8)
        base = stc.stc_extract(y, params)
        H = stc.build_parity_check(params, 16)
        for i in range(16):
            if not H[:, i].any():
                continue
            flipped = y.copy()
            flipped[i] = 1
            assert not np.array_equal(stc.stc_extract(flipped, params), base)

    def test_flip_count_near_entropy_bound(self):
        # uniform costs: average flips approach n * H2^-1(m/n); the deepest
        # trellis (h=12) is needed to get the coding loss under 10%
        rng = np.random.default_rng(24)
        n, m = 512, 256
        params = stc.default_params(n, m, h=12)
        expected = n * inverse_binary_entropy(m / n)
        total_flips = 0
        trials = 300
        for _ in range(trials):
            x = rng.integers(0, 2, n).astype(np.uint8)
            msg = rng.integers(0, 2, m).astype(np.uint8)
            y, _ = stc.stc_embed(x, np.ones(n), msg, params)
            total_flips += int((y != x).sum())
        assert total_flips / trials == pytest.approx(expected, rel=0.10)

    def test_wet_positions_never_flip(self):
        rng = np.random.default_rng(25)
        for _ in range(30):
            params, x, msg, costs = random_instance(rng, n_max=24, h_max=5)
            wet = rng.random(x.size) < 0.2
            costs[wet] = WET_COST
            try:
                y, _ = stc.stc_embed(x, costs, msg, params)
            except InfeasibleError:
                continue
            assert np.array_equal(y[wet], x[wet])

    def test_all_wet_infeasible(self):
        rng = np.random.default_rng(26)
        params = stc.default_params(16, 8, h=4)
        x = np.zeros(16, dtype=np.uint8)
        msg = np.ones(8, dtype=np.uint8)
        with pytest.raises(InfeasibleError):
            stc.stc_embed(x, np.full(16, WET_COST), msg, params)

    def test_raising_flipped_cost_never_lowers_distortion(self):
        rng = np.random.default_rng(27)
        for _ in range(30):
            params, x, msg, costs = random_instance(rng)
            y, total = stc.stc_embed(x, costs, msg, params)
            flipped = np.nonzero(y != x)[0]
            if flipped.size == 0:
                continue
            bumped = costs.copy()
            bumped[flipped[0]] *= 3.0
            _, total2 = stc.stc_embed(x, bumped, msg, params)
            assert total2 >= total - 1e-12

    def test_message_too_long(self):
        with pytest.raises(InfeasibleError):
            stc.stc_embed(
                np.zeros(4, dtype=np.uint8),
                np.ones(4),
                np.ones(5, dtype=np.uint8),
                stc.StcParams(stc.make_sub_matrix(2, 1), 5),
            )


class TestScanOrder:
    def test_row_major(self):
        assert stc.scan_order(2, 2, "row_major").tolist() == [0, 1, 2, 3]

    def test_deterministic(self):
        a = stc.scan_order(8, 8, "interleaved", seed=5)
        b = stc.scan_order(8, 8, "interleaved", seed=5)
        assert np.array_equal(a, b)

    def test_bijection(self):
        perm = stc.scan_order(7, 9, "interleaved", seed=1)
        assert sorted(perm.tolist()) == list(range(63))

    def test_unknown_order(self):
        with pytest.raises(ValueError):
            stc.scan_order(4, 4, "spiral")


class TestEmbedImage:
    def test_roundtrip_fig6_scale(self):
        rng = np.random.default_rng(28)
        cover = rng.integers(0, 256, (256, 256), dtype=np.uint8)
        pmap = np.clip(rng.random((256, 256)) * 0.4 + 0.05, 0.0, 0.5)
        msg = rng.integers(0, 2, 128 * 128).astype(np.uint8)
        stego = stc.embed_image(cover, pmap, msg, seed=3)
        assert np.abs(stego.astype(int) - cover.astype(int)).max() <= 1
        rec = stc.extract_image(stego, msg.size, seed=3)
        assert np.array_equal(rec, msg)

    def test_changes_follow_probability(self):
        rng = np.random.default_rng(29)
        cover = rng.integers(0, 256, (128, 128), dtype=np.uint8)
        pmap = np.full((128, 128), 0.01)
        pmap[:, 64:] = 0.45  # "textured" half
        msg = rng.integers(0, 2, 1024).astype(np.uint8)
        stego = stc.embed_image(cover, pmap, msg, seed=4)
        changed = stego != cover
        assert pmap[changed].mean() > pmap.mean()

    def test_wet_pixels_untouched(self):
        rng = np.random.default_rng(30)
        cover = rng.integers(0, 256, (64, 64), dtype=np.uint8)
        pmap = np.clip(rng.random((64, 64)) * 0.4 + 0.05, 0.0, 0.5)
        pmap[10:20, 10:20] = 0.0  # wet block
        msg = rng.integers(0, 2, 512).astype(np.uint8)
        stego = stc.embed_image(cover, pmap, msg, seed=5)
        assert np.array_equal(stego[10:20, 10:20], cover[10:20, 10:20])

    def test_saturated_pixels_stay_in_range(self):
        rng = np.random.default_rng(31)
        cover = np.where(rng.random((64, 64)) < 0.5, 0, 255).astype(np.uint8)
        pmap = np.full((64, 64), 0.3)
        msg = rng.integers(0, 2, 512).astype(np.uint8)
        stego = stc.embed_image(cover, pmap, msg, seed=6)
        assert stego.min() >= 0 and stego.max() <= 255
        assert np.array_equal(stc.extract_image(stego, msg.size, seed=6), msg)

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(32)
        cover = rng.integers(0, 256, (64, 64), dtype=np.uint8)
        pmap = np.clip(rng.random((64, 64)) * 0.4 + 0.05, 0.0, 0.5)
        msg = rng.integers(0, 2, 1024).astype(np.uint8)
        a = stc.embed_image(cover, pmap, msg, seed=9)
        b = stc.embed_image(cover, pmap, msg, seed=9)
        assert np.array_equal(a, b)
