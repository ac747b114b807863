"""Residual diagnostics, subgradients and the two turnkey demonstrations.

* :func:`subgradient_interval` -- one-sided derivatives of a concave function.
* :func:`euler_residual` / :func:`transversality_check` -- RCK-form path checks.
* :func:`counterexample_suite` -- the linear model ``u = c``, ``F = k - c``
  whose HJB equation has infinitely many solutions.
* :func:`magic_of_capital_demo` -- an admissible path from ``k = 0`` with a
  finite payoff although ``u(0) = -inf``.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np


class DomainError(ValueError):
    pass


class FormMismatch(TypeError):
    """The operation needs an RCK-form model ``F = f(k) - d k - c``, ``u = u(c)``."""


@dataclass(frozen=True)
class SubgradientInterval:
    d_plus: float
    d_minus: float
    h_used: float

    def contains(self, value, slack=0.0):
        return self.d_plus - slack <= value <= self.d_minus + slack


@dataclass(frozen=True)
class ResidualSeries:
    times: np.ndarray
    values: np.ndarray
    sup_norm: float

    def to_dict(self):
        return {"times": np.asarray(self.times).tolist(),
                "values": np.asarray(self.values).tolist(), "sup_norm": self.sup_norm}


@dataclass(frozen=True)
class CheckVerdict:
    name: str
    passed: bool
    tolerance: float
    values: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


@dataclass
class DiagnosticsReport:
    euler_residual: Optional[ResidualSeries]
    transversality_samples: list
    hjb_along_path: Optional[ResidualSeries]
    verdicts: list

    @property
    def ok(self):
        return all(v.passed for v in self.verdicts)

    def to_dict(self):
        return {
            "euler_residual": None if self.euler_residual is None else self.euler_residual.to_dict(),
            "transversality_samples": [list(s) for s in self.transversality_samples],
            "hjb_along_path": None if self.hjb_along_path is None else self.hjb_along_path.to_dict(),
            "verdicts": [v.to_dict() for v in self.verdicts],
        }


# ---------------------------------------------------------------------------
# subgradients
# ---------------------------------------------------------------------------

def _richardson(d1, d2, d4):
    # removes the O(h) and O(h^2) terms of a one-sided difference quotient
    return (d1 - 6.0 * d2 + 8.0 * d4) / 3.0


def subgradient_interval(g, x, h):
    """Right and left derivatives ``(D+ g(x), D- g(x))`` of a concave ``g``.

    One-sided quotients at ``h``, ``h/2`` and ``h/4`` are combined by
    Richardson extrapolation, which is exact for piecewise-linear kinks and
    third-order accurate for smooth ``g``. Concavity brackets the one-sided
    derivatives by the ``h/4`` quotients, ``dp(h/4) <= D+ <= D- <= dm(h/4)``;
    extrapolated values are clipped into that bracket, which matters when a
    kink sits inside the stencil but away from ``x``.

    Raises
    ------
    DomainError
        If ``x - h <= 0`` or ``g`` is not finite on the stencil.
    """
    x, h = float(x), float(h)
    if not h > 0:
        raise DomainError(f"h must be > 0, got {h}")
    if x - h <= 0:
        raise DomainError(f"stencil leaves the positive half-line: x - h = {x - h}")
    steps = np.array([h, h / 2, h / 4])
    with np.errstate(all="ignore"):
        g0 = float(g(x))
        gp = np.array([float(g(x + s)) for s in steps])
        gm = np.array([float(g(x - s)) for s in steps])
    if not (np.isfinite(g0) and np.all(np.isfinite(gp)) and np.all(np.isfinite(gm))):
        raise DomainError(f"g is not finite on the stencil around x={x}")
    dp = (gp - g0) / steps
    dm = (g0 - gm) / steps
    lo, hi = dp[-1], dm[-1]
    d_plus = min(max(_richardson(*dp), lo), max(hi, lo))
    d_minus = max(min(_richardson(*dm), hi), d_plus)
    return SubgradientInterval(float(d_plus), float(d_minus), h)


# ---------------------------------------------------------------------------
# path diagnostics
# ---------------------------------------------------------------------------

def _require_rck(model):
    if model.rck is None:
        raise FormMismatch(f"model {model.label!r} is not of RCK form")
    return model.rck


def euler_residual(model, path):
    """``d/dt u'(c) - (rho + d - f'(k)) u'(c)`` at interior samples.

    The time derivative is the second-order centred difference of
    :func:`numpy.gradient` on the (possibly non-uniform) sample times.
    """
    r = _require_rck(model)
    t, k, c = path.times, path.capital, path.consumption
    if t.size < 3:
        raise ValueError("euler_residual needs at least 3 samples")
    if np.any(c <= 0):
        raise ValueError("euler_residual needs c > 0 along the path")
    q = np.asarray(r.u_prime(c), dtype=float)
    dq = np.gradient(q, t)
    res = (dq - (model.rho + r.d - np.asarray(r.f_prime(k), dtype=float)) * q)[1:-1]
    return ResidualSeries(t[1:-1].copy(), res, float(np.max(np.abs(res))))


def transversality_values(model, path, samples):
    r = _require_rck(model)
    T = np.asarray(samples, dtype=float)
    if np.any(T < path.times[0]) or np.any(T > path.times[-1]):
        raise ValueError("transversality samples must lie within the path's time support")
    k, c = path.at(T)
    with np.errstate(all="ignore"):
        return np.exp(-model.rho * T) * np.asarray(r.u_prime(c), dtype=float) * \
            np.asarray(r.f(k), dtype=float)


def transversality_check(model, path, samples, tol=None):
    """Evaluate ``exp(-rho T) u'(c(T)) f(k(T))`` at the sample times.

    Passes if the values are strictly decreasing in magnitude and the last
    one is below ``tol``. The default ``tol`` is a quarter of the first
    value, i.e. at least a fourfold decay across the sampled window; pass an
    absolute ``tol`` for a stricter test on long paths.
    """
    T = np.sort(np.asarray(samples, dtype=float))
    vals = transversality_values(model, path, T)
    if tol is None:
        tol = 0.25 * abs(float(vals[0])) if vals.size else 0.0
    mags = np.abs(vals)
    passed = bool(np.all(np.isfinite(vals)) and np.all(np.diff(mags) < 0)
                  and mags[-1] < tol)
    return CheckVerdict("transversality", passed, float(tol),
                        [(float(a), float(b)) for a, b in zip(T, vals)])


def diagnose(model, path, V=None, samples=None, euler_tol=1e-3, hjb_tol=1e-3):
    """Run every applicable check on ``path``.

    The Euler and transversality checks need an RCK-form model; the HJB
    residual along the path needs a value function ``V``.
    """
    from .hjb import hjb_residual

    verdicts = []
    euler, samples_out, along = None, [], None
    if model.rck is not None and np.all(path.consumption > 0) and path.times.size >= 3:
        euler = euler_residual(model, path)
        scale = float(np.max(np.abs(model.rck.u_prime(path.consumption))))
        tol = euler_tol * scale
        verdicts.append(CheckVerdict("euler_residual", euler.sup_norm <= tol, tol,
                                     [euler.sup_norm]))
        if samples is None:
            t_end = path.times[-1]
            samples = [t_end / 8, t_end / 4, t_end / 2, t_end]
        tv = transversality_check(model, path, samples)
        samples_out = tv.values
        verdicts.append(tv)
    if V is not None:
        lo, hi = V.domain
        inside = (path.capital >= lo) & (path.capital <= hi)
        ks = path.capital[inside]
        res = np.array([hjb_residual(model, V, float(k)) for k in ks])
        along = ResidualSeries(path.times[inside], res,
                               float(np.max(np.abs(res))) if res.size else 0.0)
        scale = max(1.0, float(np.max(np.abs(V.value(ks))))) if ks.size else 1.0
        verdicts.append(CheckVerdict("hjb_along_path", bool(along.sup_norm <= hjb_tol * scale),
                                     hjb_tol * scale, [along.sup_norm]))
    return DiagnosticsReport(euler, samples_out, along, verdicts)


# ---------------------------------------------------------------------------
# demonstrations
# ---------------------------------------------------------------------------

@dataclass
class CounterexampleReport:
    k_bar: float
    grid: list
    nonuniqueness_residuals: dict
    nonuniqueness_max_abs: dict
    bound_fractions: list
    bound_payoffs: list
    bound_exact: list
    forced_k: float
    forced_dV: float
    forced_v: float
    rho1: float = 1.0

    @property
    def nonuniqueness_holds(self):
        return all(self.nonuniqueness_max_abs[a] <= 1e-12 * a * max(self.grid) for a in self.nonuniqueness_max_abs)

    @property
    def payoff_bound_holds(self):
        p = np.asarray(self.bound_payoffs)
        return bool(np.all(p >= 0) and np.all(p <= self.k_bar + 1e-9) and np.any(p > 0))

    @property
    def contradiction(self):
        return self.forced_dV < 1.0

    def to_dict(self):
        return {
            "k_bar": self.k_bar,
            "nonuniqueness": {"rho": self.rho1, "grid": self.grid,
                      "candidates": [{"a": a, "max_abs_residual": self.nonuniqueness_max_abs[a],
                                      "residuals": self.nonuniqueness_residuals[a]}
                                     for a in self.nonuniqueness_max_abs],
                      "holds": self.nonuniqueness_holds},
            "payoff_bound": {"rho": 2.0, "fractions": self.bound_fractions,
                      "payoffs": self.bound_payoffs, "exact": self.bound_exact,
                      "bound": [0.0, self.k_bar], "holds": self.payoff_bound_holds,
                      "forced_solution": {"v": self.forced_v, "k": self.forced_k,
                                          "dV": self.forced_dV,
                                          "contradiction": self.contradiction}},
        }


def counterexample_suite(k_bar=1.0, n_grid=50, fractions=(0.0, 0.25, 0.5, 0.75, 1.0),
                         slopes=(1.0, 2.0, 5.0), v=1.0, rho1=1.0):
    """Numerical skeleton of the linear counterexample ``u = c``, ``F = k - c``.

    (i) With ``rho = 1`` every ``V(k) = a k`` with ``a >= 1`` zeroes the
    HJB residual (``rho1`` changes the discount rate of this part, for
    contrast). (ii) With ``rho = 2`` the constant-fraction paths
    ``c = s k_bar`` have payoff ``s k_bar / 2`` in ``[0, k_bar]``. (iii) The
    forced quadratic ``V = v k**2`` has ``V'(k) = 2 v k < 1`` near 0. This is
    a demonstration, not a proof.
    """
    from .hjb import hjb_residual
    from .model import make_linear_counterexample
    from .ode import AnalyticValue, Path, payoff

    k_bar = float(k_bar)
    if not k_bar > 0:
        raise ValueError("k_bar must be > 0")
    grid = np.geomspace(0.1 * k_bar, 10.0 * k_bar, n_grid)
    m1 = make_linear_counterexample(float(rho1), k_domain=(grid[0], grid[-1]))
    residuals, max_abs = {}, {}
    for a in slopes:
        V = AnalyticValue(lambda k, a=a: a * k, lambda k, a=a: a + 0.0 * k)
        r = [hjb_residual(m1, V, float(k)) for k in grid]
        residuals[float(a)] = r
        max_abs[float(a)] = float(np.max(np.abs(r)))

    m2 = make_linear_counterexample(2.0, k_domain=(0.1 * k_bar, 10.0 * k_bar))
    # 40 time units leave e^{-80} of the integrand; log-spaced knots resolve t = 0
    t = np.concatenate([[0.0], np.geomspace(1e-6, 40.0, 4000)])
    payoffs, exact = [], []
    for s in fractions:
        c = np.full_like(t, s * k_bar)
        k = s * k_bar + (1.0 - s) * k_bar * np.exp(t)  # closed form of dk/dt = k - c
        payoffs.append(float(payoff(m2, Path(t, k, c), "trapezoid").value))
        exact.append(s * k_bar / 2.0)

    forced_k = float(np.geomspace(0.01, 1.0, n_grid)[0])
    return CounterexampleReport(k_bar, grid.tolist(), residuals, max_abs,
                                [float(s) for s in fractions], payoffs, exact,
                                forced_k, 2.0 * v * forced_k, float(v), float(rho1))


@dataclass
class MagicReport:
    payoff: float
    bound: float
    closed_form: float
    margin: float
    admissibility_residual: float
    tail_bound: float

    @property
    def bound_holds(self):
        return self.payoff >= self.bound

    def to_dict(self):
        d = asdict(self)
        d["bound_holds"] = self.bound_holds
        return d


def magic_path(n=4000, t_end=40.0):
    """``k = t^2/16``, ``c = t/8`` on a log-spaced time grid starting at 0."""
    from .ode import Path

    t = np.concatenate([[0.0], np.geomspace(1e-8, t_end, n)])
    return Path(t, t ** 2 / 16.0, t / 8.0, {"termination": "completed", "integrator": "closed_form"})


def magic_of_capital_demo(n=4000, t_end=40.0):
    """Starting from zero capital, consumption ``c = t/8`` is admissible and
    earns a finite payoff near ``-sqrt(8 pi)`` even though ``u(0) = -inf``.
    """
    from .model import make_magic_model
    from .ode import payoff

    model = make_magic_model()
    path = magic_path(n, t_end)
    t = path.times
    kdot = t / 8.0
    adm = float(np.max(np.abs(kdot - model.F(path.capital, path.consumption))))
    res = payoff(model, path, "clamped_singular")
    bound = -math.sqrt(32.0) - math.sqrt(8.0) / math.e
    closed = -math.sqrt(8.0) * math.gamma(0.5)
    return MagicReport(float(res.value), bound, closed, float(res.value) - bound, adm,
                       float(res.tail_bound))
