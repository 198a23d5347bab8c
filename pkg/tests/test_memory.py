import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from acap_gemm.blocking import BlockingParams
from acap_gemm.errors import CapacityError
from acap_gemm.memory import (
    DEFAULT_PLACEMENT,
    MemorySpec,
    PlacementMap,
    compute_to_comm_ratio,
    mb_to_bytes,
    reuse_factors,
    validate_footprints,
)


class TestMemorySpec:
    def test_defaults(self):
        mem = MemorySpec()
        assert mem.registers == 2048
        assert mem.local == 32_768
        assert mem.ultra == 17_059_840       # 16.27 MB, binary convention
        assert mem.block_ram == 4_456_448    # 4.25 MB
        assert mem.ddr == 2 * 1024 ** 3
        assert (mem.registers < mem.local < mem.block_ram
                < mem.ultra < mem.ddr)

    def test_mb_conventions(self):
        assert mb_to_bytes(4.25, "binary") == 4_456_448
        assert mb_to_bytes(16.27, "decimal") == 16_270_000
        with pytest.raises(ValueError):
            mb_to_bytes(1.0, "si")

    def test_positive_capacities(self):
        with pytest.raises(ValueError):
            MemorySpec(local=0)

    def test_unknown_level(self):
        with pytest.raises(ValueError):
            MemorySpec().capacity("l2")


class TestPlacementMap:
    def test_default_complete(self):
        pm = PlacementMap()
        assert pm.level_of("Br") == "local"
        assert pm.level_of("Ac") == "ultra"
        assert set(pm.assignment) == set(DEFAULT_PLACEMENT)

    def test_missing_operand(self):
        partial = {k: v for k, v in DEFAULT_PLACEMENT.items() if k != "Cr"}
        with pytest.raises(ValueError):
            PlacementMap(partial)

    def test_unknown_level(self):
        bad = dict(DEFAULT_PLACEMENT, Br="l1")
        with pytest.raises(ValueError):
            PlacementMap(bad)


class TestFootprints:
    def test_gmio_ping_pong_30kb(self):
        # 10 KB of Br data needs ping + pong buffers on top: 30 KB of 32.
        params = BlockingParams(mc=8, nc=8, kc=1280)
        rep = validate_footprints(params, MemorySpec(), br_mode="gmio")
        assert rep.usage["local"] == 30_720
        assert rep.ok

    def test_stream_no_buffering(self):
        params = BlockingParams(mc=8, nc=8, kc=1280)
        rep = validate_footprints(params, MemorySpec(), br_mode="stream")
        assert rep.usage["local"] == 10_240

    def test_paper_subproblem_bytes(self):
        params = BlockingParams(256, 256, 2048)
        rep = validate_footprints(params, MemorySpec())
        assert rep.usage["ultra"] == 512 * 1024
        assert rep.usage["block_ram"] == 512 * 1024
        assert rep.usage["local"] == 16 * 1024
        assert rep.ok

    def test_over_capacity_names_level(self):
        params = BlockingParams(mc=8, nc=8, kc=3750)
        with pytest.raises(CapacityError) as ei:
            validate_footprints(params, MemorySpec(), br_mode="gmio")
        assert ei.value.levels == ["local"]
        assert ei.value.report.usage["local"] == 3 * 30_000

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            validate_footprints(BlockingParams(8, 8, 8), MemorySpec(), "dma")

    @settings(max_examples=30, deadline=None)
    @given(kc=st.integers(1, 1300), nr_mul=st.integers(1, 2))
    def test_gmio_is_3x_stream(self, kc, nr_mul):
        params = BlockingParams(mc=8, nc=8 * nr_mul, kc=kc, nr=8 * nr_mul)
        mem = MemorySpec()
        stream = validate_footprints(params, mem, "stream").usage["local"]
        try:
            gmio = validate_footprints(params, mem, "gmio").usage["local"]
        except CapacityError as exc:
            gmio = exc.report.usage["local"]
        assert gmio == 3 * stream


class TestIntensity:
    def test_inner_loop_macs_per_byte(self):
        rep = compute_to_comm_ratio(8, 8, 2048)
        assert rep.macs_per_ar_byte == 8.0

    def test_asymptote(self):
        rep = compute_to_comm_ratio(8, 8, 10**9)
        assert rep.ops_per_element == pytest.approx(8.0, abs=1e-5)

    def test_formula(self):
        mr, nr, kc = 8, 8, 100
        rep = compute_to_comm_ratio(mr, nr, kc)
        assert rep.ops_per_element == pytest.approx(
            2 * mr * nr * kc / (2 * mr * nr + mr * kc + nr * kc))

    def test_degenerate_kc(self):
        rep = compute_to_comm_ratio(8, 8, 0)
        assert rep.ops_per_element == 0.0
        assert rep.macs_per_ar_byte == 0.0

    def test_bad_args(self):
        with pytest.raises(ValueError):
            compute_to_comm_ratio(0, 8, 16)


class TestReuseFactors:
    def test_paper_problem(self):
        rf = reuse_factors(256, 256, 2048, BlockingParams(256, 256, 2048))
        assert rf == {"Bc": 1, "Ac": 32, "Br": 32, "Cr": 2048}

    def test_params_equal_dims(self):
        rf = reuse_factors(64, 64, 64, BlockingParams(64, 64, 64))
        assert rf["Bc"] == 1

    def test_double_m(self):
        rf = reuse_factors(128, 64, 64, BlockingParams(64, 64, 64))
        assert rf["Bc"] == 2

    def test_bad_dims(self):
        with pytest.raises(ValueError):
            reuse_factors(0, 8, 8, BlockingParams(8, 8, 8))
