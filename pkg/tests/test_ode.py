from dataclasses import replace

import numpy as np
import pytest
from scipy.optimize import brentq

from hjbgrowth import (AnalyticValue, IntegratorConfig, Path, ScalarField2, euler_shooting,
                       make_linear_counterexample, make_log_ak, make_rck, make_rck_cobb_douglas,
                       optimal_path, payoff, pure_accumulation_path)
from hjbgrowth.diagnostics import euler_residual
from hjbgrowth.model import crra_utility
from hjbgrowth.ode import (COMPLETED, DIVERGED, K_COLLAPSED, RangeExit, Undefined,
                           steady_state)
from hjbgrowth.policy import policy_scalar

from oracles import log_ak_value, rck_steady_state

RHO = 0.05


def _log_ak_closed_form(domain=(0.0, np.inf)):
    # V = log(k) / rho + const, so V' = 1 / (rho k)
    return AnalyticValue(lambda k: np.log(k) / RHO, lambda k: 1.0 / (RHO * k), domain)


# --- pure accumulation ---------------------------------------------------------------

def test_ak_accumulation_is_exponential(log_ak):
    path = pure_accumulation_path(log_ak, 1.0, IntegratorConfig(t_end=10.0))
    assert path.termination == COMPLETED
    assert path.capital[-1] == pytest.approx(np.e, rel=1e-8)
    assert np.all(path.consumption == 0.0)


def test_stationary_accumulation_at_sqrt_production():
    # sqrt(k) = 0.1 k at k = 100
    m = make_rck(np.sqrt, 0.1, crra_utility(1.0), 0.05,
                 f_prime=lambda k: 0.5 / np.sqrt(k), k_domain=(1.0, 200.0))
    path = pure_accumulation_path(m, 100.0, IntegratorConfig(t_end=50.0))
    assert np.max(np.abs(path.capital - 100.0)) <= 1e-9 * 100.0


def test_small_capital_grows(rck):
    path = pure_accumulation_path(rck, 1e-4, IntegratorConfig(t_end=20.0))
    assert np.all(np.diff(path.capital) >= 0)
    assert path.capital[-1] > 1e-4


def test_collapsing_accumulation_is_flagged(log_ak):
    decay = ScalarField2(lambda k, c: -np.asarray(k, dtype=float) - c,
                         lambda k, c: -1.0 + 0 * np.asarray(k) * c,
                         lambda k, c: -1.0 + 0 * np.asarray(k) * c)
    path = pure_accumulation_path(replace(log_ak, technology=decay), 1.0,
                                  IntegratorConfig(t_end=100.0))
    assert path.termination == K_COLLAPSED
    assert "anomaly" in path.meta
    assert path.times[-1] == pytest.approx(np.log(1e8), rel=1e-4)


# --- optimal path ----------------------------------------------------------------------

def test_log_ak_optimal_path_matches_closed_form(log_ak):
    path = optimal_path(log_ak, _log_ak_closed_form(), 1.0, IntegratorConfig(t_end=40.0))
    growth = np.exp(0.05 * path.times)
    assert np.max(np.abs(path.capital / growth - 1)) <= 1e-4
    assert np.max(np.abs(path.consumption / (0.05 * growth) - 1)) <= 1e-4
    assert path.capital.min() > 0


def test_fixed_point_of_the_policy_is_a_constant_path(rck, rck_solved):
    V, _ = rck_solved

    def drift(k):
        return float(rck.F(k, policy_scalar(rck, k, float(V.deriv(k)))))

    k_fix = brentq(drift, 3.0, 6.0, xtol=1e-14)
    assert k_fix == pytest.approx(float(rck_steady_state()), rel=1e-3)
    cfg = IntegratorConfig(t_end=100.0)
    path = optimal_path(rck, V, k_fix, cfg)
    assert np.max(np.abs(path.capital - k_fix)) <= 10 * cfg.rtol * k_fix


def test_rck_optimal_path_approaches_steady_state(rck, rck_solved):
    V, _ = rck_solved
    k_ss = float(rck_steady_state())
    path = optimal_path(rck, V, k_ss / 2, IntegratorConfig(t_end=100.0))
    assert path.termination == COMPLETED
    assert abs(path.capital[-1] / k_ss - 1) <= 1e-2
    assert np.all(np.diff(path.capital) > 0)
    # consumption is continuous: no jumps beyond the local trend
    assert np.max(np.abs(np.diff(path.consumption))) < 1e-2


def test_leaving_the_grid_raises_with_partial_path(log_ak):
    V = _log_ak_closed_form(domain=(0.1, 10.0))
    with pytest.raises(RangeExit) as exc:
        optimal_path(log_ak, V, 1.0, IntegratorConfig(t_end=100.0))
    partial = exc.value.path
    assert partial is not None
    assert partial.times[-1] == pytest.approx(20 * np.log(10.0), rel=1e-6)
    with pytest.raises(RangeExit):
        optimal_path(log_ak, V, 20.0)


def test_fixed_and_adaptive_steppers_agree(log_ak):
    V = _log_ak_closed_form()
    a = optimal_path(log_ak, V, 1.0, IntegratorConfig(t_end=40.0))
    b = optimal_path(log_ak, V, 1.0, IntegratorConfig(method="rk4_fixed", t_end=40.0, step=0.01))
    common = np.intersect1d(np.round(a.times, 9), np.round(b.times, 9))
    assert common.size > 100
    ka = np.interp(common, a.times, a.capital)
    kb = np.interp(common, b.times, b.capital)
    assert np.max(np.abs(ka / kb - 1)) <= 1e-6


def test_positivity_along_optimal_paths(rck, rck_solved):
    V, _ = rck_solved
    for k_bar in (0.3, 2.0, 9.0):
        path = optimal_path(rck, V, k_bar, IntegratorConfig(t_end=60.0, n_out=301))
        assert path.capital.min() > 0


# --- shooting -------------------------------------------------------------------------

def test_steady_state_matches_oracle(rck):
    assert steady_state(rck) == pytest.approx(float(rck_steady_state()), rel=1e-12)
    # f'(k) = 0.1 never falls to rho + d = 0.05
    assert steady_state(make_log_ak(0.1, 0.05)) is None


@pytest.mark.parametrize("delta,reason", [(1e-3, K_COLLAPSED), (-1e-3, DIVERGED)])
def test_perturbed_shooting_leaves_the_saddle_path(rck, rck_solved, delta, reason):
    V, _ = rck_solved
    k_bar = float(rck_steady_state()) / 2
    c0 = policy_scalar(rck, k_bar, float(V.deriv(k_bar)))
    path = euler_shooting(rck, k_bar, c0 + delta, IntegratorConfig(t_end=100.0))
    assert path.termination == reason
    assert path.times[-1] < 100.0
    if reason == DIVERGED:
        assert path.meta["divergence_test"] in ("cap", "phase_region")


def test_shooting_divergence_cap(rck):
    # far too little consumption: capital runs away past the cap
    cfg = IntegratorConfig(t_end=500.0, cap_factor=2.0)
    path = euler_shooting(rck, 0.5, 1e-6, cfg)
    assert path.termination == DIVERGED


def test_shooting_needs_rck_form(log_ak):
    with pytest.raises(ValueError):
        euler_shooting(replace(log_ak, rck=None), 1.0, 0.1)


# --- payoff ---------------------------------------------------------------------------

def test_constant_path_payoff_of_linear_model():
    m = make_linear_counterexample(1.0)
    t = np.linspace(0.0, 40.0, 40001)
    path = Path(t, np.full_like(t, 2.0), np.full_like(t, 2.0))
    res = payoff(m, path)
    assert res.value + res.tail_bound == pytest.approx(2.0, rel=1e-7)
    assert res.tail_bound == pytest.approx(2.0 * np.exp(-40.0), rel=1e-9)


# long horizons need a consumption cap sized for k ~ e^20
WIDE = make_log_ak(0.1, RHO, k_domain=(0.1, 1e10))


def test_log_ak_payoff_equals_value():
    log_ak = WIDE
    path = optimal_path(log_ak, _log_ak_closed_form(), 1.0,
                        IntegratorConfig(t_end=400.0, n_out=8001))
    res = payoff(log_ak, path)
    assert res.value + res.tail_bound == pytest.approx(float(log_ak_value(1.0)), rel=1e-4)


def test_optimal_path_beats_constant_consumption():
    log_ak = WIDE
    cfg = IntegratorConfig(t_end=400.0, n_out=8001)
    best = payoff(log_ak, optimal_path(log_ak, _log_ak_closed_form(), 1.0, cfg))
    best = best.value + best.tail_bound
    t = np.linspace(0.0, 400.0, 8001)
    for c in (0.01, 0.03, 0.05, 0.08, 0.1):
        k = c / 0.1 + (1.0 - c / 0.1) * np.exp(0.1 * t)   # dk/dt = 0.1 k - c
        res = payoff(log_ak, Path(t, k, np.full_like(t, c)))
        assert res.value + res.tail_bound < best


def test_zero_consumption_with_log_utility(log_ak):
    t = np.linspace(0.0, 1.0, 11)
    assert payoff(log_ak, Path(t, np.exp(0.1 * t), np.zeros_like(t))).value == -np.inf


def test_payoff_undefined_with_both_infinities(log_ak):
    wild = ScalarField2(lambda c, k: np.where(c == 0, -np.inf, np.where(c > 5, np.inf, c)) + 0 * k)
    t = np.linspace(0.0, 1.0, 5)
    c = np.array([0.0, 1.0, 2.0, 6.0, 7.0])
    with pytest.raises(Undefined):
        payoff(replace(log_ak, utility=wild), Path(t, np.ones_like(t), c))


def test_payoff_quadrature_name_is_validated(log_ak):
    t = np.linspace(0.0, 1.0, 5)
    with pytest.raises(ValueError):
        payoff(log_ak, Path(t, np.ones_like(t), np.ones_like(t)), "simpson")


# --- Path and config validation ----------------------------------------------------------

def test_path_invariants():
    with pytest.raises(ValueError):
        Path([0.0, 1.0], [1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        Path([0.5, 1.0], [1.0, 1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        Path([0.0, 0.0], [1.0, 1.0], [1.0, 1.0])
    p = Path([0.0, 1.0], [1.0, 2.0], [0.5, 0.5])
    with pytest.raises(ValueError):
        p.capital[0] = 3.0
    assert p.at(0.5)[0] == pytest.approx(1.5)


@pytest.mark.parametrize("kw", [dict(method="euler"), dict(t_end=0.0), dict(step=-1.0),
                                dict(k_floor=0.0), dict(n_out=1)])
def test_integrator_config_validation(kw):
    with pytest.raises(ValueError):
        IntegratorConfig(**kw)


def test_default_floor_scales_with_initial_capital():
    assert IntegratorConfig().floor_for(3.0) == pytest.approx(3e-8)
    assert IntegratorConfig(k_floor=0.1).floor_for(3.0) == 0.1


def test_euler_residual_of_the_rck_optimal_path(rck, rck_solved):
    V, _ = rck_solved
    path = optimal_path(rck, V, float(rck_steady_state()) / 2, IntegratorConfig(t_end=100.0))
    res = euler_residual(rck, path)
    scale = np.max(np.abs(rck.rck.u_prime(path.consumption)))
    assert res.sup_norm <= 1e-3 * scale
