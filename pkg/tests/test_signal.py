import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfront.signal import (PILOT_VALUE, build_uniform_plan, dft_at_subcarriers, draw_symbols,
                           idft_time_samples, make_constellation, project_to_levels)


def naive_idft(X):
    M = X.size
    q = np.arange(M)
    return np.array([np.sum(X * np.exp(2j * np.pi * qq * q / M)) for qq in q]) / np.sqrt(M)


def naive_dft(x, indices):
    M = x.size
    q = np.arange(M)
    return np.array([np.sum(x * np.exp(-2j * np.pi * q * m / M)) for m in indices]) / np.sqrt(M)


@pytest.mark.parametrize("name", ["qpsk", "16qam", "QPSK", "16-QAM"])
def test_constellation_unit_power_and_symmetry(name):
    c = make_constellation(name)
    assert abs(c.average_power - 1.0) < 1e-12
    for levels in (c.real_levels, c.imag_levels):
        assert np.all(np.diff(levels) > 0)
        np.testing.assert_allclose(levels, -levels[::-1], atol=0)


def test_16qam_levels():
    c = make_constellation("16qam")
    np.testing.assert_allclose(c.real_levels, np.array([-3, -1, 1, 3]) / np.sqrt(10))
    assert c.points.size == 16


def test_unknown_modulation():
    with pytest.raises(ValueError):
        make_constellation("8psk")


class TestPlan:
    def test_default_plan_spacing(self):
        plan = build_uniform_plan(256, 64, 64, 6, np.random.default_rng(0))
        np.testing.assert_array_equal(plan.data, np.arange(0, 256, 4))
        assert plan.pilots.size == 64 and plan.nulls.size == 128

    def test_full_data_plan(self):
        plan = build_uniform_plan(8, 8, 0, 2, np.random.default_rng(0))
        np.testing.assert_array_equal(plan.data, np.arange(8))
        assert plan.pilots.size == 0 and plan.nulls.size == 0

    def test_disjoint_partition(self):
        plan = build_uniform_plan(32, 8, 8, 4, np.random.default_rng(3))
        np.testing.assert_array_equal(plan.data, np.arange(0, 32, 4))
        sets = [set(plan.data), set(plan.pilots), set(plan.nulls)]
        assert not (sets[0] & sets[1]) and not (sets[0] & sets[2]) and not (sets[1] & sets[2])
        assert sets[0] | sets[1] | sets[2] == set(range(32))

    def test_rejects_non_divisor(self):
        with pytest.raises(ValueError):
            build_uniform_plan(31, 8, 0, 2, np.random.default_rng(0))

    def test_rejects_too_many_pilots(self):
        with pytest.raises(ValueError):
            build_uniform_plan(32, 8, 25, 2, np.random.default_rng(0))

    def test_rejects_R_not_below_M(self):
        with pytest.raises(ValueError):
            build_uniform_plan(4, 4, 0, 4, np.random.default_rng(0))


def test_draw_symbols_contents():
    rng = np.random.default_rng(1)
    plan = build_uniform_plan(32, 8, 8, 4, rng)
    c = make_constellation("qpsk")
    grid = draw_symbols(plan, c, 3, rng)
    qpsk = {complex(a, b) / np.sqrt(2) for a in (-1, 1) for b in (-1, 1)}
    for v in grid.symbols[:, plan.data].ravel():
        assert min(abs(v - p) for p in qpsk) < 1e-15
    assert np.all(grid.symbols[:, plan.nulls] == 0)
    assert np.all(grid.symbols[:, plan.pilots] == PILOT_VALUE)


class TestTransforms:
    def test_dc_grid(self):
        M = 16
        X = np.zeros(M, complex)
        X[0] = np.sqrt(M)
        np.testing.assert_allclose(idft_time_samples(X, 3), np.ones(M + 2), atol=1e-12)

    def test_matches_naive_idft(self):
        rng = np.random.default_rng(2)
        c = make_constellation("qpsk")
        X = rng.choice(c.points, 8)
        np.testing.assert_allclose(idft_time_samples(X, 1), naive_idft(X), atol=1e-12)

    def test_cyclic_prefix(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        R = 5
        s = idft_time_samples(X, R)
        assert s.size == 16 + R - 1
        # s[i] is q = i - (R-1); CP samples equal s[q + M]
        np.testing.assert_array_equal(s[: R - 1], s[-(R - 1):])

    def test_all_ones_dft(self):
        M = 16
        out = dft_at_subcarriers(np.ones(M), np.arange(M))
        expected = np.zeros(M)
        expected[0] = np.sqrt(M)
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_dft_matches_naive(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        idx = np.array([0, 3, 5, 15])
        np.testing.assert_allclose(dft_at_subcarriers(x, idx), naive_dft(x, idx), atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 64), st.integers(1, 6), st.integers(0, 2**31 - 1))
    def test_round_trip_and_parseval(self, M, R, seed):
        R = min(R, M - 1) or 1
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((2, M)) + 1j * rng.standard_normal((2, M))
        s = idft_time_samples(X, R)[:, R - 1:]
        back = dft_at_subcarriers(s, np.arange(M), axis=1)
        scale = np.linalg.norm(X)
        assert np.max(np.abs(back - X)) <= 1e-12 * scale
        assert abs(np.sum(np.abs(s) ** 2) - np.sum(np.abs(X) ** 2)) <= 1e-12 * scale ** 2


class TestProjection:
    def test_nearest_qpsk(self):
        lv = make_constellation("qpsk").real_levels
        assert project_to_levels(0.9, lv) == pytest.approx(1 / np.sqrt(2))

    def test_tie_goes_low(self):
        lv = make_constellation("qpsk").real_levels
        assert project_to_levels(0.0, lv) == -1 / np.sqrt(2)

    def test_16qam(self):
        lv = make_constellation("16qam").real_levels
        assert project_to_levels(-0.5, lv) == pytest.approx(-1 / np.sqrt(10))

    @settings(max_examples=200, deadline=None)
    @given(st.floats(-10, 10, allow_nan=False), st.sampled_from(["qpsk", "16qam"]))
    def test_matches_exhaustive_and_idempotent(self, x, name):
        lv = make_constellation(name).real_levels
        p = float(project_to_levels(x, lv))
        assert p in lv
        assert abs(x - p) == np.abs(x - lv).min()
        assert project_to_levels(p, lv) == p
