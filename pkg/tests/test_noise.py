import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stiraplab.cpb import (CPBModel, calibrated_energy_scale, cpb_spectrum,
                           synthetic_sensitivities)
from stiraplab.dynamics import MarkovRates, propagate_unitary
from stiraplab.errors import ConfigError
from stiraplab.model3 import DetuningParams, PulseParams, ThreeLevelDrive
from stiraplab.noise import (SPASpec, gauss_hermite_nodes,
                             gaussian_dephasing_equivalent,
                             markovian_final_populations, monte_carlo_nodes,
                             spa_average)


class TestGaussHermiteNodes:
    def test_three_point_rule(self):
        nodes, weights = gauss_hermite_nodes(3, 1.0)
        order = np.argsort(nodes)
        assert np.allclose(nodes[order], [-np.sqrt(3), 0.0, np.sqrt(3)])
        assert np.allclose(weights[order], [1 / 6, 2 / 3, 1 / 6])

    def test_degenerate_sigma(self):
        nodes, weights = gauss_hermite_nodes(21, 0.0)
        assert np.array_equal(nodes, [0.0])
        assert np.array_equal(weights, [1.0])

    @pytest.mark.parametrize("order", [3, 5, 9, 21, 41])
    def test_weights_normalized(self, order):
        _, weights = gauss_hermite_nodes(order, 0.7)
        assert abs(weights.sum() - 1.0) <= 1e-12

    @given(order=st.sampled_from([5, 7, 11, 21]),
           sigma=st.floats(1e-4, 10.0))
    def test_gaussian_moments(self, order, sigma):
        # moment-matching oracle: <x^2> = s^2, <x^4> = 3 s^4
        nodes, weights = gauss_hermite_nodes(order, sigma)
        assert weights @ nodes ** 2 == pytest.approx(sigma ** 2, rel=1e-10)
        assert weights @ nodes ** 4 == pytest.approx(3 * sigma ** 4, rel=1e-10)

    def test_order_validation(self):
        with pytest.raises(ValueError):
            gauss_hermite_nodes(4, 1.0)
        with pytest.raises(ValueError):
            gauss_hermite_nodes(1, 1.0)


class TestSPASpec:
    def test_quadratic_requires_linear(self):
        with pytest.raises(ConfigError):
            SPASpec(sigma_x=0.01, fluct_detunings_linear=False,
                    fluct_detunings_quadratic=True)
        with pytest.raises(ConfigError):
            SPASpec(sigma_x=0.01, fluct_rabi_quadratic=True)

    def test_validation(self):
        with pytest.raises(ConfigError):
            SPASpec(sigma_x=-0.1)
        with pytest.raises(ConfigError):
            SPASpec(sigma_x=0.1, order=10)
        with pytest.raises(ConfigError):
            SPASpec(sigma_x=0.1, method="bogus")
        with pytest.raises(ConfigError):
            SPASpec(sigma_x=0.1, method="monte-carlo", samples=0)

    def test_monte_carlo_seeded_stream(self):
        a, _ = monte_carlo_nodes(100, 42, 0.01)
        b, _ = monte_carlo_nodes(100, 42, 0.01)
        c, _ = monte_carlo_nodes(100, 43, 0.01)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)


def working_point():
    """J = 1, q_g = 0.48 device under the paper-style drive calibration."""
    spectrum = cpb_spectrum(CPBModel(J=1.0, q_g=0.48))
    pulses = PulseParams.from_scaled(15.0)
    drive = ThreeLevelDrive(pulses)
    es = calibrated_energy_scale(spectrum, 13.75 / 0.6) * pulses.omega0
    return drive, spectrum, es


class TestSPAAverage:
    def test_zero_sigma_equals_deterministic_run(self):
        drive, spectrum, es = working_point()
        res = spa_average(drive, spectrum, SPASpec(sigma_x=0.0),
                          energy_scale=es)
        ref = propagate_unitary(drive)
        assert np.array_equal(res.populations, ref.populations)
        assert res.efficiency == ref.efficiency

    def test_noise_cannot_help_at_resonance(self):
        drive, spectrum, es = working_point()
        grid = np.array([drive.pulses.t_start, drive.pulses.t_end])
        noiseless = spa_average(drive, spectrum, SPASpec(sigma_x=0.0),
                                energy_scale=es, grid=grid).efficiency
        for sigma_x in (0.001, 0.002, 0.004, 0.008):
            noisy = spa_average(drive, spectrum, SPASpec(sigma_x=sigma_x),
                                energy_scale=es, grid=grid,
                                tol=1e-8).efficiency
            assert noisy <= noiseless + 1e-9

    def test_quadrature_order_consistency_perturbative(self):
        # with the raw charging-unit scale the detuning spread is tiny and
        # successive quadrature orders must agree tightly
        drive, spectrum, _ = working_point()
        grid = np.array([drive.pulses.t_start, drive.pulses.t_end])
        effs = [spa_average(drive, spectrum,
                            SPASpec(sigma_x=0.01, order=order),
                            energy_scale=1.0, grid=grid, tol=1e-9).efficiency
                for order in (15, 21)]
        assert abs(effs[0] - effs[1]) <= 1e-4

    def test_quadrature_vs_monte_carlo(self):
        # converged quadrature against the seeded sample stream, 3 std errors
        drive, spectrum, es = working_point()
        grid = np.array([drive.pulses.t_start, drive.pulses.t_end])
        gh = spa_average(drive, spectrum, SPASpec(sigma_x=0.004, order=101),
                         energy_scale=es, grid=grid, tol=1e-8)
        n = 20000
        mc = spa_average(drive, spectrum,
                         SPASpec(sigma_x=0.004, method="monte-carlo",
                                 samples=n, seed=777),
                         energy_scale=es, grid=grid, tol=1e-6)
        # std of per-sample efficiency at this point is ~0.29 (measured)
        se = 0.29 / np.sqrt(n)
        assert abs(gh.efficiency - mc.efficiency) <= 3 * se

    def test_weighted_history_and_efficiency_consistent(self):
        drive, spectrum, es = working_point()
        res = spa_average(drive, spectrum, SPASpec(sigma_x=0.004, order=11),
                          energy_scale=es, tol=1e-8)
        assert res.efficiency == pytest.approx(res.populations[-1, 1])
        assert np.allclose(res.populations.sum(axis=1), 1.0, atol=1e-6)

    def test_markov_path_runs_lindblad_per_node(self):
        drive, spectrum, es = working_point()
        grid = np.linspace(drive.pulses.t_start, drive.pulses.t_end, 200)
        rates = MarkovRates(gamma_10=0.02)
        res = spa_average(drive, spectrum, SPASpec(sigma_x=0.004, order=5),
                          rates=rates, energy_scale=es, grid=grid, tol=1e-8)
        pure = spa_average(drive, spectrum, SPASpec(sigma_x=0.004, order=5),
                           energy_scale=es, grid=grid, tol=1e-8)
        assert res.efficiency < pure.efficiency   # decay only hurts
        assert 0.0 <= res.efficiency <= 1.0

    def test_linear_invariance_a1_sigma_tradeoff(self):
        # linear-order results depend on A1 and sigma_x only through A1*sigma_x
        drive = ThreeLevelDrive(PulseParams.from_scaled(20.0))
        grid = np.array([drive.pulses.t_start, drive.pulses.t_end])
        e1 = spa_average(drive, synthetic_sensitivities(a1=1.0),
                         SPASpec(sigma_x=0.08), grid=grid, tol=1e-9).efficiency
        e2 = spa_average(drive, synthetic_sensitivities(a1=2.0),
                         SPASpec(sigma_x=0.04), grid=grid, tol=1e-9).efficiency
        assert e1 == pytest.approx(e2, abs=1e-6)


class TestMarkovianClosedForm:
    def test_no_dephasing(self):
        assert markovian_final_populations(0.0, 1.0, 0.6) == (1.0, 0.0, 0.0)

    def test_strong_dephasing_fully_mixed(self):
        rho11, rho00, rho22 = markovian_final_populations(1e6, 1.0, 0.6)
        assert rho11 == pytest.approx(1 / 3)
        assert rho00 == pytest.approx(1 / 3)
        assert rho22 == pytest.approx(1 / 3)

    @given(gamma=st.floats(0.0, 100.0), T=st.floats(0.01, 10.0),
           tau=st.floats(0.01, 10.0))
    def test_populations_sum_to_one(self, gamma, T, tau):
        rho11, rho00, rho22 = markovian_final_populations(gamma, T, tau)
        assert rho11 + rho00 + rho22 == pytest.approx(1.0, abs=1e-12)
        assert rho00 == rho22

    @given(T=st.floats(0.1, 5.0), tau=st.floats(0.1, 5.0))
    @settings(max_examples=20)
    def test_monotone_in_rate(self, T, tau):
        vals = [markovian_final_populations(g, T, tau)[0]
                for g in (0.0, 0.1, 1.0, 10.0)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_validation(self):
        with pytest.raises(ValueError):
            markovian_final_populations(-0.1, 1.0, 0.6)
        with pytest.raises(ValueError):
            markovian_final_populations(0.1, 0.0, 0.6)


class TestGaussianDephasingEquivalent:
    def test_arithmetic(self):
        assert gaussian_dephasing_equivalent(1.0, np.sqrt(2)) \
            == pytest.approx(1.0)

    def test_scaling(self):
        assert gaussian_dephasing_equivalent(2.0, 1.0) == pytest.approx(
            0.5 * gaussian_dephasing_equivalent(1.0, 1.0))

    @given(T2=st.floats(0.1, 50.0), a1=st.floats(0.01, 10.0))
    def test_free_induction_reaches_1_over_e(self, T2, a1):
        # Gaussian average of exp(i a1 x t) at t = T2 equals e^-1
        sigma_x = gaussian_dephasing_equivalent(T2, a1)
        nodes, weights = gauss_hermite_nodes(41, sigma_x)
        coherence = weights @ np.exp(1j * a1 * nodes * T2)
        assert abs(coherence) == pytest.approx(np.exp(-1.0), rel=1e-6)

    def test_sweet_spot_rejected(self):
        with pytest.raises(ValueError):
            gaussian_dephasing_equivalent(1.0, 0.0)
        with pytest.raises(ValueError):
            gaussian_dephasing_equivalent(-1.0, 1.0)
