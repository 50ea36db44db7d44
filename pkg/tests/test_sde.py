import json
import math
import warnings

import numpy as np
import pytest

from cranemarket.errors import InputError, NumericalError
from cranemarket.sde import (
    SdeSystem,
    SimulationSpec,
    correlation_factor,
    estimate_parameters,
    euler_maruyama,
    load_system,
    paths_csv,
)


def system(alpha, beta=None, sigma=None, corr=None, x0=None):
    m = len(alpha)
    return SdeSystem(
        tuple(f"f{i}" for i in range(m)),
        alpha,
        np.zeros((m, m)) if beta is None else beta,
        np.zeros(m) if sigma is None else sigma,
        np.eye(m) if corr is None else corr,
        np.zeros(m) if x0 is None else x0,
    )


def euler_reference(alpha, beta, x0, horizon, steps):
    """Plain-Python forward Euler for dX = (alpha + beta X) dt."""
    x = list(x0)
    dt = horizon / steps
    m = len(x)
    for _ in range(steps):
        mu = [alpha[i] + sum(beta[i][j] * x[j] for j in range(m) if j != i) for i in range(m)]
        x = [x[i] + mu[i] * dt for i in range(m)]
    return x


class TestValidation:
    def test_beta_diagonal(self):
        with pytest.raises(InputError, match="diagonal"):
            system([0, 0], beta=[[1, 0], [0, 0]])

    def test_negative_sigma(self):
        with pytest.raises(InputError):
            system([0], sigma=[-1])

    def test_corr_shape_and_symmetry(self):
        with pytest.raises(InputError):
            system([0, 0], corr=[[1, 0.5], [0.4, 1]])
        with pytest.raises(InputError):
            system([0, 0], corr=[[2, 0], [0, 1]])

    def test_not_psd(self):
        corr = [[1, 0.9, -0.9], [0.9, 1, 0.9], [-0.9, 0.9, 1]]
        with pytest.raises(NumericalError):
            correlation_factor(corr)

    def test_singular_psd_accepted(self):
        chol = correlation_factor([[1, 1], [1, 1]])
        np.testing.assert_allclose(chol @ chol.T, [[1, 1], [1, 1]], atol=1e-9)

    def test_spec(self):
        with pytest.raises(InputError):
            SimulationSpec(horizon=0)
        with pytest.raises(InputError):
            SimulationSpec(paths=0)

    def test_load_system(self, tmp_path):
        doc = {"factors": ["a", "b"], "alpha": [1, 2], "beta": [[0, 0.1], [0.2, 0]],
               "sigma": [0.1, 0.2], "corr": [[1, 0.3], [0.3, 1]], "x0": [5, 6]}
        path = tmp_path / "sys.json"
        path.write_text(json.dumps(doc))
        sysm = load_system(str(path))
        assert sysm.to_dict() == {**doc, "alpha": [1.0, 2.0], "x0": [5.0, 6.0]}
        with pytest.raises(InputError, match="x0"):
            load_system({k: v for k, v in doc.items() if k != "x0"})


class TestSimulation:
    def test_deterministic_limit(self):
        sysm = system([0.5, -2.0, 3.0], x0=[1.0, 2.0, 3.0])
        rep = euler_maruyama(sysm, SimulationSpec(2.0, 100, 7, 1))
        np.testing.assert_allclose(rep.terminal_mean, [2.0, -2.0, 9.0], atol=1e-9)
        np.testing.assert_allclose(rep.terminal_std, 0, atol=1e-9)

    def test_coupled_ode_against_python_euler(self):
        beta = [[0, 0.3, -0.2], [0.1, 0, 0.4], [-0.5, 0.2, 0]]
        sysm = system([0.1, 0.2, -0.1], beta=beta, x0=[1.0, 0.5, -1.0])
        rep = euler_maruyama(sysm, SimulationSpec(3.0, 300, 1, 0))
        ref = euler_reference([0.1, 0.2, -0.1], beta, [1.0, 0.5, -1.0], 3.0, 300)
        np.testing.assert_allclose(rep.terminal_mean, ref, atol=1e-9)

    def test_coupling_closed_form(self):
        sysm = system([0, 0], beta=[[0, 1], [0, 0]], x0=[0, 1])
        rep = euler_maruyama(sysm, SimulationSpec(2.0, 50, 1, 0))
        assert rep.terminal_mean[0] == pytest.approx(2.0, abs=1e-12)

    def test_variance(self):
        rep = euler_maruyama(system([0], sigma=[1]), SimulationSpec(1, 100, 10_000, 2024))
        se = math.sqrt(2 / (10_000 - 1))
        assert abs(rep.terminal_std[0] ** 2 - 1) <= 3 * se

    def test_increment_correlation(self):
        corr = [[1, 0.8], [0.8, 1]]
        rep = euler_maruyama(system([0, 0], sigma=[1, 1], corr=corr), SimulationSpec(1, 100, 10_000, 5))
        se = (1 - 0.8**2) / math.sqrt(10_000 * 100)
        assert abs(rep.increment_corr[0, 1] - 0.8) <= 3 * se

    def test_quantiles_monotone(self):
        rep = euler_maruyama(system([0.1, 0], sigma=[1, 2]), SimulationSpec(1, 20, 500, 3))
        q = np.array([rep.quantiles[k] for k in sorted(rep.quantiles)])
        assert np.all(np.diff(q, axis=0) >= 0)
        assert np.all(np.abs(rep.increment_corr) <= 1)

    def test_seed_determinism_and_partitioning(self):
        sysm = system([0.1, 0.0], beta=[[0, 0.2], [-0.1, 0]], sigma=[0.5, 1.0], corr=[[1, -0.4], [-0.4, 1]])
        spec = SimulationSpec(1, 25, 1000, 77)
        ref = euler_maruyama(sysm, spec).to_json()
        assert euler_maruyama(sysm, spec).to_json() == ref
        for block, workers in ((1, 1), (37, 4), (250, 3), (999, 2)):
            assert euler_maruyama(sysm, spec, workers=workers, block_paths=block).to_json() == ref
        assert euler_maruyama(sysm, SimulationSpec(1, 25, 1000, 78)).to_json() != ref

    def test_first_paths_stable_when_adding_paths(self):
        sysm = system([0], sigma=[1])
        few = euler_maruyama(sysm, SimulationSpec(1, 10, 5, 9), keep_paths=True).paths
        many = euler_maruyama(sysm, SimulationSpec(1, 10, 50, 9), keep_paths=True).paths
        np.testing.assert_array_equal(few, many[:5])

    def test_non_finite(self):
        sysm = system([0, 0], beta=[[0, 1e200], [1e200, 0]], x0=[1e200, 1e200])
        with pytest.raises(NumericalError, match="path 0, step"):
            euler_maruyama(sysm, SimulationSpec(1, 10, 3, 0))

    def test_paths_csv(self):
        rep = euler_maruyama(system([1.0]), SimulationSpec(1, 4, 2, 0), keep_paths=True)
        lines = paths_csv(rep).splitlines()
        assert lines[0] == "path,step,time,f0"
        assert len(lines) == 1 + 2 * 5
        assert lines[-1].split(",")[-1] == "1.0"
        with pytest.raises(InputError):
            paths_csv(euler_maruyama(system([1.0]), SimulationSpec(1, 4, 2, 0)))

    def test_convergence_order(self):
        beta = [[0, 0.8, -0.3], [-0.6, 0, 0.5], [0.4, -0.7, 0]]
        sysm = system([0.2, -0.1, 0.3], beta=beta, x0=[1.0, -0.5, 0.8])

        def terminal(steps):
            return euler_maruyama(sysm, SimulationSpec(2.0, steps, 1, 0)).terminal_mean

        ref = terminal(4000)
        e1 = np.max(np.abs(terminal(40) - ref))
        e2 = np.max(np.abs(terminal(80) - ref))
        assert 1.7 <= e1 / e2 <= 2.3


class TestEstimation:
    def test_linear_series(self):
        x = np.array([[1.0, 3, 5, 7, 9, 11], [2.0, 1.5, 1, 0.5, 0, -0.5]])
        sysm = estimate_parameters(x)
        np.testing.assert_allclose(sysm.sigma, 0, atol=1e-12)
        np.testing.assert_allclose(sysm.alpha, [2.0, -0.5], atol=1e-9)
        np.testing.assert_allclose(sysm.beta, 0, atol=1e-9)
        np.testing.assert_array_equal(sysm.x0, [11, -0.5])

    def test_default_factor_names(self):
        x = np.cumsum(np.random.default_rng(1).normal(size=(3, 20)), axis=1)
        assert estimate_parameters(x).factor_names == ("market_share", "pricing", "technology")

    def test_independent_walks(self):
        x = np.cumsum(np.random.default_rng(8).normal(size=(2, 1000)), axis=1)
        assert abs(estimate_parameters(x).corr[0, 1]) < 0.1

    def test_roundtrip(self):
        alpha, sigma = 0.3, 1.5
        spec = SimulationSpec(5000.0, 5000, 1, 31)
        rep = euler_maruyama(system([alpha], sigma=[sigma]), spec, keep_paths=True)
        fit = estimate_parameters(rep.paths[0].T, dt=spec.dt)
        se = sigma / math.sqrt(spec.horizon)
        assert abs(fit.alpha[0] - alpha) <= 3 * se
        assert abs(fit.sigma[0] / sigma - 1) <= 0.05

    def test_coupled_roundtrip(self):
        beta = np.array([[0, 0.05], [-0.05, 0]])
        sysm = system([0.0, 0.0], beta=beta, sigma=[0.2, 0.2], x0=[1.0, 0.0])
        spec = SimulationSpec(2000.0, 20000, 1, 2)
        path = euler_maruyama(sysm, spec, keep_paths=True).paths[0].T
        fit = estimate_parameters(path, dt=spec.dt)
        np.testing.assert_allclose(fit.beta, beta, atol=0.02)

    def test_underdetermined_warns(self, sample_panel):
        with pytest.warns(UserWarning, match="coupling set to 0"):
            sysm = estimate_parameters(sample_panel)
        assert sysm.factor_names == sample_panel.companies
        np.testing.assert_array_equal(sysm.beta, 0)
        np.testing.assert_allclose(sysm.alpha, np.diff(sample_panel.values, axis=1).mean(axis=1))
        correlation_factor(sysm.corr)

    def test_too_short(self):
        with pytest.raises(InputError, match="too short"):
            estimate_parameters([[1.0, 2.0]])

    def test_no_warning_when_identified(self):
        x = np.cumsum(np.random.default_rng(1).normal(size=(2, 10)), axis=1)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            estimate_parameters(x)
