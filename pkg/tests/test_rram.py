import dataclasses
import json

import numpy as np
import pytest

from xbarlp.accel import MvmMode, build_sym_block, matmul_accel
from xbarlp.rram import (
    CapacityError,
    DeviceProfile,
    ProfileError,
    RramBackend,
    bundled_profile,
    encode,
    noisy_mvm,
    profile_from_file,
    quantization_bound,
)


def quiet_profile(**overrides):
    """Deterministic, noise-free profile for structural tests."""
    fields = dict(
        name="test",
        g_min=1e-6,
        g_max=1e-4,
        levels=2 ** 16,
        write_noise_sigma=0.0,
        read_noise_sigma=0.0,
        verify_tolerance=1e-3,
        max_write_pulses=10,
        e_write=1e-9,
        e_read=1e-13,
        t_write=1e-7,
        t_read=1e-7,
    )
    fields.update(overrides)
    return DeviceProfile(**fields)


class TestDeviceProfile:
    def test_bundled_taox_hfox_geometry(self):
        p = bundled_profile("taox-hfox")
        assert (p.crossbar_rows, p.crossbar_cols) == (64, 64)
        assert (p.grid_rows, p.grid_cols) == (4, 4)
        assert p.capacity_rows == p.capacity_cols == 256

    def test_bundled_epiram_loads(self):
        p = bundled_profile("epiram")
        assert p.name == "epiram"
        assert p.levels >= 2

    def test_unknown_bundled_name(self):
        with pytest.raises(ProfileError):
            bundled_profile("does-not-exist")

    def test_conductance_order_enforced(self):
        with pytest.raises(ProfileError, match="g_min"):
            quiet_profile(g_min=1e-4, g_max=1e-6)

    def test_binary_levels_accepted(self):
        assert quiet_profile(levels=2).levels == 2

    def test_missing_field_in_file(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text(json.dumps({"name": "x", "g_min": 1e-6, "g_max": 1e-4}))
        with pytest.raises(ProfileError, match="missing"):
            profile_from_file(str(path))

    def test_file_round_trip(self, tmp_path):
        p = quiet_profile()
        doc = dataclasses.asdict(p)
        path = tmp_path / "p.json"
        path.write_text(json.dumps(doc))
        q = profile_from_file(str(path))
        assert q == p

    def test_negative_cost_rejected(self):
        with pytest.raises(ProfileError):
            quiet_profile(e_write=-1.0)


class TestEncode:
    def test_zero_matrix_exact_and_single_pass(self):
        block = build_sym_block(np.zeros((2, 3)))
        arr = encode(block, quiet_profile(write_noise_sigma=0.01), seed=0)
        assert np.all(arr.decode() == 0.0)  # zero increment writes are exact
        for t in arr.tiles:
            assert np.all(t.g_pos == arr.profile.g_min)
            assert np.all(t.g_neg == arr.profile.g_min)
        assert arr.ledger.n_write_pulses == 2 * 5 * 5  # one pass per pair half
        assert arr.n_saturated == 0

    def test_single_entry_within_tolerance(self):
        block = build_sym_block(np.array([[1.0]]))
        prof = quiet_profile(write_noise_sigma=1e-3, verify_tolerance=1e-3,
                             max_write_pulses=50)
        arr = encode(block, prof, seed=1)
        assert abs(arr.decode()[0, 1] - 1.0) <= 1e-3
        assert arr.n_saturated == 0

    def test_random_100x100_taox_profile(self):
        rng = np.random.default_rng(7)
        M = rng.standard_normal((100, 100))
        M = (M + M.T) / 2
        from xbarlp.accel import SymBlock
        block = SymBlock(M=M, m=50, n=50)
        prof = bundled_profile("taox-hfox")
        arr = encode(block, prof, seed=7)
        err = np.abs(arr.decode() - M).max()
        assert err <= prof.verify_tolerance * np.abs(M).max()
        n_cells = 2 * 100 * 100
        assert arr.ledger.n_write_pulses > n_cells  # some write-verify retries

    def test_capacity_error(self):
        prof = quiet_profile(crossbar_rows=4, crossbar_cols=4, grid_rows=2, grid_cols=2)
        block = build_sym_block(np.zeros((5, 4)))  # logical dim 9 > 8
        with pytest.raises(CapacityError):
            encode(block, prof, seed=0)

    def test_determinism_bit_identical(self, rng):
        K = rng.standard_normal((20, 25))
        block = build_sym_block(K)
        prof = bundled_profile("taox-hfox")
        a = encode(block, prof, seed=5)
        b = encode(block, prof, seed=5)
        for ta, tb in zip(a.tiles, b.tiles):
            np.testing.assert_array_equal(ta.g_pos, tb.g_pos)
            np.testing.assert_array_equal(ta.g_neg, tb.g_neg)
        v = rng.standard_normal(45)
        np.testing.assert_array_equal(noisy_mvm(a, v), noisy_mvm(b, v))

    def test_saturation_flagged_when_tolerance_unreachable(self, rng):
        K = rng.uniform(0.2, 1.0, size=(6, 6))
        block = build_sym_block(K)
        prof = quiet_profile(levels=256, write_noise_sigma=0.05,
                             verify_tolerance=1e-9, max_write_pulses=3)
        arr = encode(block, prof, seed=0)
        assert arr.n_saturated > 0

    def test_binary_quantization_half_step_bound(self, rng):
        K = rng.uniform(-1.0, 1.0, size=(4, 4))
        block = build_sym_block(K)
        prof = quiet_profile(levels=2, verify_tolerance=0.51)
        arr = encode(block, prof, seed=0)
        max_abs = np.abs(block.M).max()
        half_step = max_abs / 2  # two levels span the full range
        assert np.abs(arr.decode() - block.M).max() <= half_step + 1e-12


class TestNoisyMvm:
    def test_noiseless_decoded_exact(self, rng):
        # entries sit exactly on quantization levels, zero noise: MVM == M @ v
        K = np.array([[1.0, -0.5], [0.25, 0.0]])
        block = build_sym_block(K)
        arr = encode(block, quiet_profile(levels=5), seed=0)
        v = rng.standard_normal(4)
        np.testing.assert_allclose(noisy_mvm(arr, v), block.M @ v, atol=1e-12)

    def test_zero_input_zero_output(self, rng):
        K = rng.standard_normal((3, 3))
        arr = encode(build_sym_block(K), quiet_profile(read_noise_sigma=0.05), seed=2)
        assert np.all(noisy_mvm(arr, np.zeros(6)) == 0.0)

    def test_unbiased_read_noise_monte_carlo(self):
        # fixed product entry of 10.0, relative noise 1e-2: the sample mean
        # over 10k seeded reads stays within 3 standard errors of 10.0
        block = build_sym_block(np.array([[10.0]]))
        prof = quiet_profile(read_noise_sigma=1e-2)
        arr = encode(block, prof, seed=3)
        v = np.array([0.0, 1.0])
        samples = np.array([noisy_mvm(arr, v)[0] for _ in range(10_000)])
        se = 0.1 / np.sqrt(10_000)
        assert abs(samples.mean() - 10.0) <= 3 * se
        # bounded support: multiplicative noise clipped at 4 sigma
        assert np.abs(samples - 10.0).max() <= 10.0 * 4 * 1e-2 + 1e-12

    def test_noise_off_equivalence_quantization_bound(self, rng):
        K = rng.standard_normal((30, 40))
        block = build_sym_block(K)
        arr = encode(block, quiet_profile(levels=2 ** 16), seed=0)
        for _ in range(5):
            v = rng.standard_normal(70)
            err = np.abs(noisy_mvm(arr, v) - block.M @ v).max()
            assert err <= quantization_bound(arr, v)

    def test_length_mismatch(self, rng):
        arr = encode(build_sym_block(np.eye(2)), quiet_profile(), seed=0)
        with pytest.raises(ValueError):
            noisy_mvm(arr, np.zeros(5))


class TestTelemetryAccounting:
    def test_identity_after_every_operation(self, rng):
        prof = bundled_profile("taox-hfox")
        K = rng.standard_normal((10, 14))
        arr = encode(build_sym_block(K), prof, seed=1)
        led = arr.ledger
        for _ in range(7):
            noisy_mvm(arr, rng.standard_normal(24))
            assert led.energy_j == led.n_write_pulses * prof.e_write + \
                led.n_cell_reads * prof.e_read
            assert led.latency_s == led.n_write_pulses * prof.t_write + \
                led.n_mvm_calls * prof.t_read

    def test_cell_reads_padded_lanes(self, rng):
        K = rng.standard_normal((10, 14))  # logical 24, one 64x64 tile
        prof = bundled_profile("taox-hfox")
        arr = encode(build_sym_block(K), prof, seed=1)
        before = arr.ledger.n_cell_reads
        noisy_mvm(arr, rng.standard_normal(24))
        assert arr.ledger.n_cell_reads - before == 2 * 64 * 64

    def test_cell_reads_logical_only(self, rng):
        K = rng.standard_normal((10, 14))
        prof = dataclasses.replace(bundled_profile("taox-hfox"),
                                   count_padded_lanes=False)
        arr = encode(build_sym_block(K), prof, seed=1)
        before = arr.ledger.n_cell_reads
        noisy_mvm(arr, rng.standard_normal(24))
        assert arr.ledger.n_cell_reads - before == 2 * 24 * 24

    def test_multi_tile_layout(self, rng):
        # logical dim 100 spans a 2x2 block of 64-wide tiles
        K = rng.standard_normal((50, 50))
        prof = bundled_profile("taox-hfox")
        arr = encode(build_sym_block(K), prof, seed=1)
        assert len(arr.tiles) == 4
        v = rng.standard_normal(100)
        got = noisy_mvm(arr, v)
        exact = build_sym_block(K).M @ v
        # noise is small and multiplicative, so the result stays close
        assert np.linalg.norm(got - exact) / np.linalg.norm(exact) < 0.05


class TestRramBackend:
    def test_backend_interface_with_dispatch(self, rng):
        K = rng.standard_normal((6, 8))
        prof = quiet_profile(levels=2 ** 20)
        backend = RramBackend(prof, seed=4)
        handle = backend.encode(build_sym_block(K))
        x = rng.standard_normal(8)
        out = matmul_accel(backend, handle, x, MvmMode.A_X)
        np.testing.assert_allclose(out, K @ x, atol=1e-4)
        assert backend.telemetry().n_encodes == 1
        assert backend.telemetry().n_mvm_calls == 1
