import math
import time

import numpy as np
import pytest

from sparcs import analysis, core, powalloc
from sparcs.powalloc import LN2, PowerAllocation


def _single(c, n=100):
    """One-section allocation whose sqrt(n P)/sigma equals c at sigma = 1."""
    return PowerAllocation(np.array([c * c / n]), "flat"), n


def test_se_x_asymptotic_examples():
    pa = powalloc.flat(4, 4.0)
    assert analysis.se_x_asymptotic(0.01, pa, 1.0) == 1.0
    assert analysis.se_x_asymptotic(100.0, pa, 1.0) == 0.0
    pa = PowerAllocation(np.array([2.0, 1.5, 0.4, 0.1]), "custom")
    tau2 = 1.0 / (2 * 1.0 * LN2) * 4 * 1.0  # threshold power per section = 1.0
    assert analysis.se_x_asymptotic(tau2, pa, 1.0) == pytest.approx(3.5 / 4.0)


def test_se_x_montecarlo_limits():
    pa, n = _single(200.0)
    assert analysis.se_x_montecarlo(1.0, pa, n, 16, 200).value == pytest.approx(1.0)
    pa0 = PowerAllocation(np.array([1.0]), "flat")
    est = analysis.se_x_montecarlo(1e12, pa0, 1, 2, 20_000, seed=1)
    assert abs(est.value - 0.5) < 4 * est.stderr + 1e-6


@pytest.mark.xfail(strict=True, reason="the large-M threshold surrogate ignores the soft mass "
                   "finite-M sections already carry at tau2 = sigma2 + P")
def test_se_x_montecarlo_agrees_with_asymptotic_at_start():
    params = core.CodeParams.from_rate(1024, 512, 1.5, P=15.0, sigma2=1.0)
    pa = powalloc.make_allocation("iterative", 1024, 15.0, 1.0, params.R)
    tau2 = 16.0
    mc = analysis.se_x_montecarlo(math.sqrt(tau2), pa, params.n, 512, 200, seed=0)
    assert abs(mc.value - analysis.se_x_asymptotic(tau2, pa, params.R)) < 0.05


def test_se_x_montecarlo_agrees_with_asymptotic_near_convergence():
    params = core.CodeParams.from_rate(1024, 512, 1.5, P=15.0, sigma2=1.0)
    pa = powalloc.make_allocation("iterative", 1024, 15.0, 1.0, params.R)
    mc = analysis.se_x_montecarlo(1.0, pa, params.n, 512, 200, seed=0)
    assert analysis.se_x_asymptotic(1.0, pa, params.R) == 1.0
    assert abs(mc.value - 1.0) < 0.05


def test_se_trajectory_properties():
    for frac in (0.7, 1.1):
        params = core.CodeParams.from_rate(1024, 512, frac * 2.0, P=15.0, sigma2=1.0)
        for scheme in ("iterative", "exponential", "flat"):
            pa = powalloc.make_allocation(scheme, 1024, 15.0, 1.0, params.R)
            traj = analysis.se_trajectory(pa, params)
            assert traj.tau2_seq[0] == pytest.approx(16.0)
            assert np.all((traj.x_seq >= 0) & (traj.x_seq <= 1))
            np.testing.assert_allclose(traj.tau2_seq[1:], 1.0 + 15.0 * (1 - traj.x_seq[:-1]))
            if frac > 1:
                assert not traj.converged
    params = core.CodeParams.from_rate(1024, 512, 1.4, P=15.0, sigma2=1.0)
    traj = analysis.se_trajectory(powalloc.make_allocation("iterative", 1024, 15.0, 1.0, 1.4), params)
    assert traj.converged and traj.tau2_final == pytest.approx(1.0)
    assert traj.to_csv().splitlines()[0] == "t,tau2,x"
    with pytest.raises(ValueError):
        analysis.se_trajectory(powalloc.flat(4, 1.0), params, tol=0)


def test_se_trajectory_montecarlo_mode_runs():
    params = core.CodeParams.from_rate(64, 16, 1.0, P=15.0, sigma2=1.0)
    pa = powalloc.flat(64, 15.0)
    traj = analysis.se_trajectory(pa, params, mode="montecarlo", samples=200, max_T=30)
    assert traj.converged
    with pytest.raises(ValueError):
        analysis.se_trajectory(pa, params, mode="guess")


def test_predict_se_esec_limits():
    pa, n = _single(200.0)
    assert analysis.predict_se_esec(1.0, pa, n, 64, 100).value == pytest.approx(0.0, abs=1e-12)
    assert analysis.predict_se_esec(1.0, pa, n, 1, 100).value == 0.0


# 1 - E_U[Phi(c + U)^(M-1)] evaluated with mpmath at 30 digits
FROZEN_P_ERR = [
    (2.0, 4, 0.17720704400677031),
    (4.0, 512, 0.18420697077752013),
    (5.5, 4096, 0.037829365927028855),
    (3.0, 64, 0.27124285078846306),
]


@pytest.mark.parametrize("c, M, expected", FROZEN_P_ERR)
def test_closed_form_matches_high_precision_oracle(c, M, expected):
    pa, n = _single(c)
    assert analysis.predict_esec_closed(pa, 1.0, n, M).esec == pytest.approx(expected, abs=1e-9)


def test_closed_form_examples():
    pa = powalloc.flat(8, 2.0)
    assert analysis.predict_esec_closed(pa, 1.0, 50, 1).esec == 0.0
    pa0 = PowerAllocation(np.zeros(3), "zero")
    np.testing.assert_allclose(analysis.predict_esec_closed(pa0, 1.0, 10, 2).per_section, 0.5)
    one, n = _single(2.5)
    pred = analysis.predict_esec_closed(one, 1.0, n, 32)
    assert pred.ecw == pytest.approx(pred.esec, rel=1e-12)
    with pytest.raises(ValueError):
        analysis.predict_esec_closed(pa, 1.0, 50, 4, quad_points=0)


@pytest.mark.parametrize("M", [2 ** k for k in range(1, 14)])
def test_closed_form_quadrature_stable_and_bounded(M):
    params = core.CodeParams.from_rate(256, M, 1.2, P=7.0, sigma2=1.0)
    pa = powalloc.make_allocation("iterative", 256, 7.0, 1.0, params.R)
    pred = analysis.predict_esec_closed(pa, 1.0, params.n, M)
    assert pred.quad_error < 1e-8
    assert pred.esec <= pred.ecw <= pred.per_section.sum() + 1e-15
    assert 0 <= pred.esec <= 1


@pytest.mark.parametrize("c, M", [(2.0, 16), (3.5, 256), (4.5, 2048)])
def test_closed_form_matches_argmax_monte_carlo(c, M):
    pa, n = _single(c)
    closed = analysis.predict_esec_closed(pa, 1.0, n, M).esec
    mc = analysis.mc_hard_section_errors(1.0, pa, n, M, 40_000, seed=3)
    assert abs(closed - mc.value) <= 3 * mc.stderr


def test_soft_prediction_exceeds_argmax_error():
    # the softmax mass left off the true column is larger than the argmax error probability
    pa, n = _single(3.0)
    soft = analysis.predict_se_esec(1.0, pa, n, 64, 40_000, seed=0)
    hard = analysis.predict_esec_closed(pa, 1.0, n, 64).esec
    assert soft.value > hard + 10 * soft.stderr


@pytest.mark.slow
def test_closed_form_is_much_faster_than_monte_carlo():
    params = core.CodeParams.from_rate(1024, 512, 1.5, P=15.0, sigma2=1.0)
    pa = powalloc.make_allocation("iterative", 1024, 15.0, 1.0, params.R)
    t0 = time.perf_counter()
    analysis.predict_esec_closed(pa, 1.0, params.n, 512)
    t_closed = time.perf_counter() - t0
    t0 = time.perf_counter()
    analysis.predict_se_esec(1.0, pa, params.n, 512, 10_000)
    t_mc = time.perf_counter() - t0
    assert t_mc / t_closed >= 512 / 10
