import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfront import admm
from qfront.linmodel import ObservationModel
from qfront.signal import make_constellation

from conftest import desk_config, solve_trial, symbols_recovered

QPSK = make_constellation("qpsk")
C = float(QPSK.real_levels[1])


def random_model(seed, rows=8, cols=4, cells=True):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((rows, cols))
    p = rng.standard_normal(rows)
    y = rng.standard_normal(rows)
    if cells:
        lower = y - rng.uniform(0.1, 1.0, rows)
        upper = y + rng.uniform(0.1, 1.0, rows)
        lower[::3] = -np.inf
        upper[1::3] = np.inf
    else:
        lower, upper = np.full(rows, -np.inf), np.full(rows, np.inf)
    return ObservationModel(A, p, y, lower, upper, (1, rows // 2, 1, cols // 2, 1))


def random_state(model, seed):
    rng = np.random.default_rng(seed)
    rows, cols = model.A.shape
    s = admm.init_state(model)
    for name, n in (("z", rows), ("t", rows), ("x", cols), ("b", cols),
                    ("u1", rows), ("u2", cols), ("u3", rows)):
        setattr(s, name, rng.standard_normal(n))
    return s


def z_objective(z, s, m, rho):
    return (0.5 * np.sum((z - m.y) ** 2) + 0.5 * rho * np.sum((s.t - z + s.u1) ** 2)
            + 0.5 * rho * np.sum((z - m.A @ s.x - m.p + s.u3) ** 2))


def x_objective(x, s, m):
    return 0.5 * np.sum((s.b - x + s.u2) ** 2) + 0.5 * np.sum((s.z - m.A @ x - m.p + s.u3) ** 2)


def test_config_validation():
    with pytest.raises(ValueError):
        admm.AdmmConfig(rho=0.0)
    with pytest.raises(ValueError):
        admm.AdmmConfig(iterations=0)
    with pytest.raises(ValueError):
        admm.AdmmConfig(estimate="median")


def test_init_state():
    m = random_model(0)
    s = admm.init_state(m)
    assert not np.any(s.x) and not np.any(s.u1) and not np.any(s.u2) and not np.any(s.u3)
    assert np.all((m.lower <= s.t) & (s.t <= m.upper))
    assert s.residuals == [] and s.iteration == 0


class TestZUpdate:
    @pytest.mark.parametrize("seed", range(10))
    def test_normal_equation_oracle_and_gradient(self, seed):
        m = random_model(seed)
        s = random_state(m, seed + 100)
        rho = 10.0 ** np.random.default_rng(seed).uniform(-1, 2)
        z = admm.update_z(s, m, rho)
        rhs = m.y + rho * (s.t + s.u1) + rho * (m.A @ s.x + m.p - s.u3)
        oracle = np.linalg.solve((1 + 2 * rho) * np.eye(z.size), rhs)
        np.testing.assert_allclose(z, oracle, atol=1e-8)
        grad = (z - m.y) - rho * (s.t - z + s.u1) + rho * (z - m.A @ s.x - m.p + s.u3)
        assert np.linalg.norm(grad) < 1e-9

    def test_finite_difference_minimum(self):
        m = random_model(3)
        s = random_state(m, 4)
        z = admm.update_z(s, m, 2.0)
        f0 = z_objective(z, s, m, 2.0)
        rng = np.random.default_rng(5)
        for _ in range(20):
            d = rng.standard_normal(z.size) * 1e-4
            assert z_objective(z + d, s, m, 2.0) >= f0

    def test_small_rho_limit(self):
        m = random_model(6)
        s = random_state(m, 7)
        assert np.linalg.norm(admm.update_z(s, m, 1e-12) - m.y) < 1e-9


class TestXUpdate:
    @pytest.mark.parametrize("seed", range(10))
    def test_stacked_least_squares_oracle(self, seed):
        m = random_model(seed)
        s = random_state(m, seed + 200)
        x = admm.update_x(s, m, admm.GramFactor(m.A))
        stacked = np.vstack([np.eye(m.A.shape[1]), m.A])
        target = np.concatenate([s.b + s.u2, s.z - m.p + s.u3])
        oracle = np.linalg.lstsq(stacked, target, rcond=None)[0]
        np.testing.assert_allclose(x, oracle, atol=1e-8)
        gram = np.eye(x.size) + m.A.T @ m.A
        rhs = s.b + s.u2 + m.A.T @ (s.z - m.p + s.u3)
        assert np.linalg.norm(gram @ x - rhs) / np.linalg.norm(rhs) < 1e-10
        grad = -(s.b - x + s.u2) - m.A.T @ (s.z - m.A @ x - m.p + s.u3)
        assert np.linalg.norm(grad) < 1e-8

    def test_finite_difference_minimum(self):
        m = random_model(8)
        s = random_state(m, 9)
        x = admm.update_x(s, m, admm.GramFactor(m.A))
        f0 = x_objective(x, s, m)
        rng = np.random.default_rng(10)
        for _ in range(20):
            assert x_objective(x + rng.standard_normal(x.size) * 1e-4, s, m) >= f0

    def test_zero_matrix(self):
        m = random_model(11)
        m = ObservationModel(np.zeros_like(m.A), m.p, m.y, m.lower, m.upper, m.dims)
        s = random_state(m, 12)
        np.testing.assert_allclose(admm.update_x(s, m, admm.GramFactor(m.A)), s.b + s.u2,
                                   atol=1e-15)

    def test_factor_mismatch(self):
        with pytest.raises(ValueError):
            admm.run(random_model(0), QPSK, factor=admm.GramFactor(np.zeros((8, 2))))


class TestProjections:
    def test_t_clamp(self):
        m = ObservationModel(np.zeros((4, 2)), np.zeros(4), np.zeros(4),
                             np.array([0.0, -1.0, -np.inf, 0.0]),
                             np.array([np.inf, 1.0, 0.0, 2.0]), (1, 2, 1, 1, 1))
        s = admm.init_state(m)
        s.z = np.array([-3.0, 0.5, 4.0, 3.0])
        np.testing.assert_array_equal(admm.update_t(s, m), [0.0, 0.5, 0.0, 2.0])

    def test_b_examples(self):
        m = random_model(0)
        s = admm.init_state(m)
        s.x = np.array([0.9, C, -C, -0.2])
        np.testing.assert_allclose(admm.update_b(s, QPSK), [C, C, -C, -C])

    def test_b_fixed_point(self):
        qam = make_constellation("16qam")
        m = random_model(0)
        s = admm.init_state(m)
        s.x = qam.real_levels.copy()
        np.testing.assert_array_equal(admm.update_b(s, qam), qam.real_levels)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=4, max_size=4),
           st.sampled_from(["qpsk", "16qam"]))
    def test_b_feasible_and_idempotent(self, v, name):
        c = make_constellation(name)
        s = admm.init_state(random_model(0))
        s.x = np.array(v)
        b = admm.update_b(s, c)
        assert np.all(np.isin(b[:2], c.real_levels)) and np.all(np.isin(b[2:], c.imag_levels))
        s.x = b
        np.testing.assert_array_equal(admm.update_b(s, c), b)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=8, max_size=8))
    def test_t_feasible_and_idempotent(self, v):
        m = random_model(1)
        s = admm.init_state(m)
        s.z = np.array(v)
        t = admm.update_t(s, m)
        assert np.all((m.lower <= t) & (t <= m.upper))
        s.z = t
        np.testing.assert_array_equal(admm.update_t(s, m), t)


def test_hand_computed_iteration():
    # complex 1x1 model with gain 2 lifted to diag(2, 2); rho = 1
    m = ObservationModel(2.0 * np.eye(2), np.array([0.5, 0.0]), np.array([1.0, -0.5]),
                         np.array([0.5, -np.inf]), np.array([np.inf, 0.0]), (1, 1, 1, 1, 1))
    s = admm.init_state(m)
    np.testing.assert_array_equal(s.t, [0.5, 0.0])
    admm.step(s, m, QPSK, admm.GramFactor(m.A), 1.0)
    np.testing.assert_allclose(s.z, [2 / 3, -1 / 6], atol=1e-12)
    np.testing.assert_array_equal(s.b, [-C, -C])  # zero ties go to the lower level
    np.testing.assert_allclose(s.t, [2 / 3, -1 / 6], atol=1e-12)
    np.testing.assert_allclose(s.x, [-0.07475468957, -0.20808802290], atol=1e-10)
    np.testing.assert_allclose(s.u1, [0.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(s.u2, [-0.63235209162, -0.49901875828], atol=1e-10)
    np.testing.assert_allclose(s.u3, [0.31617604581, 0.24950937914], atol=1e-10)
    assert len(s.residuals) == 1


def test_duals_unchanged_when_feasible():
    m = random_model(2, cells=False)
    s = admm.init_state(m)
    s.x = np.random.default_rng(0).standard_normal(4)
    s.b = s.x.copy()
    s.z = m.A @ s.x + m.p
    s.t = s.z.copy()
    u = admm.update_duals(s, m)
    for new, old in zip(u, (s.u1, s.u2, s.u3)):
        np.testing.assert_allclose(new, old, atol=1e-12)
    np.testing.assert_allclose(s.residuals[-1], 0.0, atol=1e-12)


class TestRun:
    def test_feasibility_every_iteration(self):
        m = random_model(3)
        s = admm.init_state(m)
        f = admm.GramFactor(m.A)
        for _ in range(15):
            admm.step(s, m, QPSK, f, 10.0)
            assert np.all((m.lower <= s.t) & (s.t <= m.upper))
            assert np.all(np.isin(s.b, QPSK.real_levels))

    def test_deterministic(self):
        m = random_model(4)
        a = admm.run(m, QPSK)
        b = admm.run(m, QPSK)
        assert a.state.x.tobytes() == b.state.x.tobytes()
        assert a.z_hat.tobytes() == b.z_hat.tobytes()
        assert a.residuals == b.residuals

    def test_residual_log_length(self):
        r = admm.run(random_model(5), QPSK, admm.AdmmConfig(iterations=7))
        assert len(r.residuals) == 7 and all(len(t) == 3 for t in r.residuals)

    def test_tolerance_stops_early(self):
        m = random_model(5, cells=False)
        r = admm.run(m, QPSK, admm.AdmmConfig(iterations=500, tol=1e30))
        assert len(r.residuals) == 1

    def test_estimate_policies(self):
        m = random_model(6)
        out = {e: admm.run(m, QPSK, admm.AdmmConfig(estimate=e)) for e in admm.ESTIMATE_POLICIES}
        s = out["model"].state
        lifted = m.A @ s.x + m.p
        np.testing.assert_allclose(out["model"].z_hat, lifted[:4] + 1j * lifted[4:])
        np.testing.assert_allclose(out["observed"].z_hat, m.y[:4] + 1j * m.y[4:])
        np.testing.assert_allclose(out["z"].z_hat, s.z[:4] + 1j * s.z[4:])

    def test_all_pilot_model_returns_pilot_signal(self):
        rng = np.random.default_rng(7)
        p = rng.standard_normal(8)
        m = ObservationModel(np.zeros((8, 0)), p, p + 0.1, np.full(8, -np.inf),
                             np.full(8, np.inf), (2, 2, 0, 0, 1))
        r = admm.run(m, QPSK)
        np.testing.assert_array_equal(r.z_hat, p[:4] + 1j * p[4:])

    def test_divergence_reported(self):
        m = random_model(8)
        m = ObservationModel(m.A, m.p, np.full(8, np.nan), m.lower, m.upper, m.dims)
        with pytest.raises(admm.AdmmDivergenceError):
            admm.run(m, QPSK)

    def test_residual_csv(self, tmp_path):
        r = admm.run(random_model(9), QPSK, admm.AdmmConfig(iterations=3))
        path = tmp_path / "res.csv"
        r.residuals_to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "iteration,r1,r2,r3" and len(lines) == 4
        assert [float(v) for v in lines[2].split(",")[1:]] == list(r.residuals[1])


def test_exact_recovery_small_noiseless():
    cfg = desk_config(num_ues=1, num_antennas=2, m_total=16, m_used=4, num_pilots=4, num_taps=2,
                      add_noise=False)
    hits = [symbols_recovered(*solve_trial(cfg, "qpsk", t, 12)[::2]) for t in range(10)]
    assert all(hits)


def test_constraint_residual_small_when_truth_feasible():
    cfg = desk_config(add_noise=False)
    small = 0
    for trial in range(20):
        _, model, res, _ = solve_trial(cfg, "qpsk", trial, 10)
        z = res.state.z
        small += np.linalg.norm(z - model.A @ res.state.x - model.p) < 1e-3 * np.linalg.norm(z)
    assert small >= 18
