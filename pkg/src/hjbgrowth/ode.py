"""Path integration: pure accumulation, the optimal-path ODE, Euler shooting.

The optimal path solves the one-dimensional ODE
``dk/dt = F(k, c*(V'(k), k))`` whose steady state is attracting, while the
Euler system in ``(k, c)`` has a saddle and amplifies any error in ``c(0)``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp, trapezoid
from scipy.optimize import brentq

from ._validation import check_positive
from .policy import BracketFailure, policy_map, policy_scalar

COMPLETED, K_COLLAPSED, DIVERGED = "completed", "k_collapsed", "diverged"


class StepFailure(RuntimeError):
    pass


class RangeExit(RuntimeError):
    """Capital left the value function's node range; ``path`` holds the partial trajectory."""

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path


class Undefined(ArithmeticError):
    """Both the positive and the negative part of the payoff integral diverge."""


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk45_adaptive"
    t_end: float = 100.0
    step: float = 0.01
    rtol: float = 1e-10
    atol: float = 1e-12
    k_floor: Optional[float] = None
    n_out: int = 2001
    cap_factor: float = 1e6

    def __post_init__(self):
        if self.method not in ("rk4_fixed", "rk45_adaptive"):
            raise ValueError(f"unknown integrator method {self.method!r}")
        check_positive(self.t_end, "t_end")
        check_positive(self.step, "step")
        if self.k_floor is not None:
            check_positive(self.k_floor, "k_floor")
        if self.n_out < 2:
            raise ValueError("n_out must be >= 2")

    def floor_for(self, k_bar):
        return self.k_floor if self.k_floor is not None else 1e-8 * k_bar


@dataclass(frozen=True)
class Path:
    times: np.ndarray
    capital: np.ndarray
    consumption: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("times", "capital", "consumption"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.times.size
        if self.capital.size != n or self.consumption.size != n:
            raise ValueError("times, capital and consumption must have equal lengths")
        if n == 0 or self.times[0] != 0.0:
            raise ValueError("a path starts at t = 0")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("path times must be increasing")

    @property
    def termination(self):
        return self.meta.get("termination", COMPLETED)

    def at(self, t):
        """Linear interpolation of ``(k, c)`` at times ``t``."""
        return (np.interp(t, self.times, self.capital),
                np.interp(t, self.times, self.consumption))


@dataclass(frozen=True)
class PayoffResult:
    value: float
    tail_bound: float
    horizon: float
    quadrature: str

    def __float__(self):
        return float(self.value)


# ---------------------------------------------------------------------------
# integrator core
# ---------------------------------------------------------------------------

def _rk4(rhs, y0, cfg, events):
    n_steps = int(np.ceil(cfg.t_end / cfg.step))
    h = cfg.t_end / n_steps
    ts, ys = [0.0], [np.asarray(y0, dtype=float)]
    y, t = ys[0], 0.0
    ev_prev = [ev(t, y) for ev in events]
    for i in range(n_steps):
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = (i + 1) * h
        if not np.all(np.isfinite(y)):
            raise StepFailure(f"rk4 produced a non-finite state at t={t:.6g}")
        ts.append(t)
        ys.append(y)
        for j, ev in enumerate(events):
            val = ev(t, y)
            if ev_prev[j] < 0 <= val:
                return np.array(ts), np.array(ys).T, j
            ev_prev[j] = val
    return np.array(ts), np.array(ys).T, None


def _integrate(rhs, y0, cfg, events):
    """Integrate ``y' = rhs(t, y)``; events fire when they cross zero upwards."""
    if cfg.method == "rk4_fixed":
        return _rk4(rhs, y0, cfg, events)

    wrapped = []
    for ev in events:
        def e(t, y, ev=ev):
            return ev(t, y)
        e.terminal = True
        e.direction = 1
        wrapped.append(e)
    t_eval = np.linspace(0.0, cfg.t_end, cfg.n_out)
    sol = solve_ivp(rhs, (0.0, cfg.t_end), y0, method="RK45", rtol=cfg.rtol, atol=cfg.atol,
                    t_eval=t_eval, events=wrapped or None)
    if sol.status == -1:
        raise StepFailure(sol.message)
    ts, ys = sol.t, sol.y
    fired = None
    if sol.status == 1:
        for j, te in enumerate(sol.t_events):
            if te.size:
                fired = j
                if ts.size == 0 or te[0] > ts[-1]:
                    ts = np.append(ts, te[0])
                    ys = np.column_stack([ys, sol.y_events[j][0]])
                break
    return ts, ys, fired


# ---------------------------------------------------------------------------
# public integrators
# ---------------------------------------------------------------------------

def pure_accumulation_path(model, k_bar, cfg=None):
    """Zero-consumption trajectory ``dk/dt = F(k, 0)``, ``k(0) = k_bar``."""
    k_bar = check_positive(k_bar, "k_bar")
    cfg = cfg or IntegratorConfig()
    floor = cfg.floor_for(k_bar)

    def rhs(t, y):
        return np.array([float(model.F(max(y[0], 0.0), 0.0))])

    ts, ys, fired = _integrate(rhs, [k_bar], cfg, [lambda t, y: floor - y[0]])
    meta = {"integrator": cfg.method, "n_samples": int(ts.size),
            "termination": K_COLLAPSED if fired is not None else COMPLETED}
    if fired is not None:
        meta["anomaly"] = "capital fell below k_floor on the pure accumulation path"
    return Path(ts, ys[0], np.zeros_like(ts), meta)


def _policy_at(model, V, k):
    p = np.asarray(V.deriv(k), dtype=float)
    if np.any(~(p > 0)):
        raise BracketFailure(float(np.ravel(k)[0]), float(np.ravel(p)[0]), model.c_cap)
    if k.size == 1:
        c = np.array([policy_scalar(model, float(k[0]), float(p[0]))])
        failed = np.isnan(c)
    else:
        c, _, _, _, _, failed = policy_map(model, k, p)
    if np.any(failed):
        i = int(np.argmax(failed))
        raise BracketFailure(float(k[i]), float(p[i]), model.c_cap)
    return c


def optimal_path(model, V, k_bar, cfg=None):
    """Integrate ``dk/dt = F(k, c*(V'(k), k))`` from ``k_bar``.

    ``V`` is anything with ``deriv(k)`` and a ``domain`` pair, e.g. a solved
    :class:`~hjbgrowth.hjb.ValueGrid` or an :class:`AnalyticValue`.

    Raises
    ------
    RangeExit
        If capital leaves ``V.domain``; the partial path is attached.
    """
    k_bar = check_positive(k_bar, "k_bar")
    cfg = cfg or IntegratorConfig()
    k_lo, k_hi = V.domain
    if not k_lo <= k_bar <= k_hi:
        raise RangeExit(f"k_bar={k_bar} outside value-function domain [{k_lo}, {k_hi}]")

    def rhs(t, y):
        k = min(max(y[0], k_lo), k_hi)
        c = _policy_at(model, V, np.array([k]))
        return np.array([float(model.F(k, c[0]))])

    events = [lambda t, y: k_lo - y[0]]
    if np.isfinite(k_hi):
        events.append(lambda t, y: y[0] - k_hi)
    ts, ys, fired = _integrate(rhs, [k_bar], cfg, events)
    k = np.clip(ys[0], k_lo, k_hi)
    c = _policy_at(model, V, k)
    meta = {"integrator": cfg.method, "n_samples": int(ts.size), "k_bar": k_bar,
            "termination": COMPLETED if fired is None else "range_exit"}
    path = Path(ts, k, c, meta)
    if fired is not None:
        raise RangeExit(f"capital left [{k_lo}, {k_hi}] at t={ts[-1]:.6g}", path)
    return path


def steady_state(model):
    """Modified golden rule ``f'(k) = rho + d`` for RCK-form models, or None."""
    if model.rck is None:
        return None
    r = model.rck
    target = model.rho + r.d

    def g(k):
        return float(r.f_prime(k)) - target

    lo, hi = 1e-12, 1.0
    if not g(lo) > 0:
        return None
    for _ in range(200):
        if g(hi) < 0:
            return brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        lo, hi = hi, 2.0 * hi
    return None


def euler_shooting(model, k_bar, c0, cfg=None):
    """Integrate the Euler system of an RCK model forward from ``(k_bar, c0)``.

    The system is ``dk/dt = f(k) - d k - c`` and
    ``dc/dt = (rho + d - f'(k)) u'(c) / u''(c)``. Termination reasons:

    * ``k_collapsed`` -- capital fell below ``k_floor``;
    * ``diverged`` -- ``k`` or ``c`` exceeded ``cap_factor * k_bar``, or the
      state entered the region ``k > k_ss`` with ``dk/dt > 0`` from which the
      trajectory can no longer reach the steady state;
    * ``completed`` -- reached ``t_end``.
    """
    if model.rck is None or model.rck.u_second is None:
        raise ValueError("euler_shooting needs an RCK-form model with u' and u''")
    k_bar = check_positive(k_bar, "k_bar")
    c0 = check_positive(c0, "c0")
    cfg = cfg or IntegratorConfig()
    r = model.rck
    floor = cfg.floor_for(k_bar)
    cap = cfg.cap_factor * k_bar
    k_ss = steady_state(model)

    def kdot(k, c):
        return float(r.f(max(k, 0.0))) - r.d * k - c

    def rhs(t, y):
        k, c = max(y[0], 0.0), max(y[1], 1e-300)
        with np.errstate(all="ignore"):
            cdot = (model.rho + r.d - float(r.f_prime(max(k, 1e-300)))) * \
                float(r.u_prime(c)) / float(r.u_second(c))
        return np.array([kdot(k, c), cdot])

    events = [lambda t, y: floor - y[0],
              lambda t, y: max(y[0], y[1]) - cap]
    if k_ss is not None:
        events.append(lambda t, y: min(y[0] - k_ss, kdot(y[0], y[1])))
    ts, ys, fired = _integrate(rhs, [k_bar, c0], cfg, events)
    reason = {None: COMPLETED, 0: K_COLLAPSED, 1: DIVERGED, 2: DIVERGED}[fired]
    meta = {"integrator": cfg.method, "n_samples": int(ts.size), "termination": reason,
            "c0": c0, "k_bar": k_bar, "k_ss": k_ss,
            "divergence_test": {None: None, 0: None, 1: "cap", 2: "phase_region"}[fired]}
    k = np.maximum(ys[0], 0.0)
    return Path(ts, k, np.maximum(ys[1], 0.0), meta)


# ---------------------------------------------------------------------------
# payoff
# ---------------------------------------------------------------------------

def discounted_utility(model, path):
    with np.errstate(all="ignore"):
        u = np.asarray(model.u(path.consumption, path.capital), dtype=float)
        return np.exp(-model.rho * path.times) * u


def payoff(model, path, quadrature="trapezoid"):
    """Discounted utility integral over the path's time support.

    The tail beyond the last sample is not added; ``tail_bound`` reports the
    estimate ``exp(-rho T) (u_T / rho + u'_T / rho**2)`` obtained by continuing
    the utility linearly in time from the last two samples.
    ``clamped_singular`` integrates a ``-inf`` first sample by fitting a power
    law ``A t**alpha`` through the next two samples (``alpha > -1``).
    """
    if quadrature not in ("trapezoid", "clamped_singular"):
        raise ValueError(f"unknown quadrature {quadrature!r}")
    t = path.times
    g = discounted_utility(model, path)
    if t.size < 2:
        raise ValueError("payoff needs at least two samples")
    if np.any(np.isposinf(g)) and np.any(np.isneginf(g)):
        raise Undefined("payoff integral has diverging positive and negative parts")
    if np.any(np.isposinf(g)):
        return PayoffResult(np.inf, 0.0, float(t[-1]), quadrature)

    start = 0
    head = 0.0
    if quadrature == "clamped_singular" and np.isneginf(g[0]) and t.size >= 3 \
            and np.all(np.isfinite(g[1:])):
        t1, t2, g1, g2 = t[1], t[2], g[1], g[2]
        if g1 == 0.0:
            head = 0.0
        else:
            alpha = np.log(g2 / g1) / np.log(t2 / t1) if g1 * g2 > 0 else np.nan
            if not np.isfinite(alpha) or alpha <= -1.0:
                return PayoffResult(-np.inf, 0.0, float(t[-1]), quadrature)
            # integral of A t**alpha over [0, t1], anchored at (t1, g1)
            head = g1 * t1 / (alpha + 1.0)
        start = 1
    gs = g[start:]
    if np.any(np.isneginf(gs)):
        return PayoffResult(-np.inf, 0.0, float(t[-1]), quadrature)
    value = head + float(trapezoid(gs, t[start:]))
    with np.errstate(all="ignore"):
        u_end = np.asarray(model.u(path.consumption[-2:], path.capital[-2:]), dtype=float)
    slope = (u_end[1] - u_end[0]) / (t[-1] - t[-2])
    rho = model.rho
    # utility continued linearly in t beyond the horizon
    tail = np.exp(-rho * t[-1]) * (u_end[1] / rho + slope / rho ** 2)
    return PayoffResult(value, float(tail), float(t[-1]), quadrature)


class AnalyticValue:
    """Closed-form value function wrapper exposing ``value``/``deriv``/``domain``."""

    def __init__(self, value, deriv, domain=(0.0, np.inf)):
        self._value, self._deriv = value, deriv
        self.domain = (float(domain[0]), float(domain[1]))

    def value(self, k):
        return self._value(np.asarray(k, dtype=float))

    def deriv(self, k):
        return self._deriv(np.asarray(k, dtype=float))

    def __call__(self, k):
        return self.value(k)
