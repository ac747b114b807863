"""Capital-accumulation models: primitives, builtin families, assumption checks.

A model is the triple (rho, u, F): the discount rate, the instantaneous
utility ``u(c, k)`` and the technology ``F(k, c)`` driving ``dk/dt = F(k, c)``.
All callables are expected to broadcast over numpy arrays.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._validation import check_positive

THETA_LOG_SWITCH = 1e-12
PASS, FAIL, UNKNOWN = "pass", "fail", "unknown"


# ---------------------------------------------------------------------------
# CRRA family
# ---------------------------------------------------------------------------

def _crra(theta, x):
    """Extended-real CRRA value; ``-inf`` at ``x == 0`` when ``theta >= 1``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if abs(theta - 1.0) < THETA_LOG_SWITCH:
            out = np.log(x)
        else:
            one_minus = 1.0 - theta
            # expm1 keeps the branch accurate for theta close to 1
            out = np.expm1(one_minus * np.log(x)) / one_minus
            if theta < 1:
                out = np.where(x == 0, -1.0 / one_minus, out)
    return out if out.ndim else float(out)


def _crra_prime(theta, x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = x ** (-theta)
    return out if out.ndim else float(out)


def _crra_second(theta, x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = -theta * x ** (-theta - 1.0)
    return out if out.ndim else float(out)


def crra_eval(theta, x):
    """Constant-relative-risk-aversion utility ``u_theta(x)``.

    Returns ``(x**(1-theta) - 1) / (1 - theta)``, or ``log(x)`` at
    ``theta == 1``. For ``x == 0`` and ``theta < 1`` the finite limit
    ``-1/(1-theta)`` is returned; for ``theta >= 1`` the value would be
    ``-inf`` and a ``ValueError`` is raised instead.
    """
    theta = check_positive(theta, "theta")
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise ValueError("crra_eval is undefined for x < 0")
    if np.any(xa == 0) and theta >= 1 - THETA_LOG_SWITCH:
        raise ValueError("crra_eval(theta >= 1, 0) is -inf")
    return _crra(theta, x)


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

def _fd_partial(fn, x, y, axis):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    base = x if axis == 0 else y
    h = 1e-6 * np.maximum(np.abs(base), 1e-3)
    if axis == 0:
        lo = np.where(x - h > 0, x - h, x)
        return (fn(x + h, y) - fn(lo, y)) / (x + h - lo)
    lo = np.where(y - h > 0, y - h, y)
    return (fn(x, y + h) - fn(x, lo)) / (y + h - lo)


@dataclass(frozen=True)
class ScalarField2:
    """A function of two nonnegative reals with optional analytic partials.

    ``eval(x, y)`` may return ``-inf`` on the boundary of the quadrant. When
    ``d_dx``/``d_dy`` are missing, central finite differences stand in.
    """

    eval: Callable
    d_dx: Optional[Callable] = None
    d_dy: Optional[Callable] = None
    label: str = ""

    def __call__(self, x, y):
        return self.eval(x, y)

    def partial_x(self, x, y):
        if self.d_dx is not None:
            return self.d_dx(x, y)
        return _fd_partial(self.eval, x, y, 0)

    def partial_y(self, x, y):
        if self.d_dy is not None:
            return self.d_dy(x, y)
        return _fd_partial(self.eval, x, y, 1)


@dataclass(frozen=True)
class RCKForm:
    """Extra structure of an RCK model ``F = f(k) - d k - c``, ``u = u(c)``."""

    f: Callable
    f_prime: Callable
    d: float
    u_prime: Callable
    u_second: Optional[Callable] = None


@dataclass(frozen=True)
class ModelSpec:
    rho: float
    utility: ScalarField2
    technology: ScalarField2
    k_domain: tuple = (0.1, 10.0)
    c_cap: float = 1.0
    d1: float = 0.0
    d2: float = 1.0
    rck: Optional[RCKForm] = None
    label: str = "custom"

    def __post_init__(self):
        if not np.isfinite(self.rho):
            raise ValueError("rho must be finite")
        k_lo, k_hi = self.k_domain
        if not 0 < k_lo < k_hi:
            raise ValueError(f"k_domain must satisfy 0 < k_lo < k_hi, got {self.k_domain}")
        check_positive(self.c_cap, "c_cap")
        check_positive(self.d1, "d1", strict=False)
        check_positive(self.d2, "d2", strict=False)

    # shorthands, argument order follows the primitives
    def u(self, c, k):
        return self.utility.eval(c, k)

    def F(self, k, c):
        return self.technology.eval(k, c)

    def u_c(self, c, k):
        return self.utility.partial_x(c, k)

    def u_k(self, c, k):
        return self.utility.partial_y(c, k)

    def F_k(self, k, c):
        return self.technology.partial_x(k, c)

    def F_c(self, k, c):
        return self.technology.partial_y(k, c)

    def with_domain(self, k_lo, k_hi, c_cap=None):
        """Copy with a new capital domain; ``c_cap`` defaults to the new bracket."""
        from dataclasses import replace

        if c_cap is None:
            probe = replace(self, k_domain=(k_lo, k_hi))
            c_cap = default_c_cap(probe.technology, k_hi)
        return replace(self, k_domain=(k_lo, k_hi), c_cap=c_cap)


@dataclass(frozen=True)
class Assumption6Params:
    k_star: float
    k_plus: float
    c_star: float
    gamma: float
    delta: float
    theta: float
    a: float
    b: float
    cc: float = 0.0

    def __post_init__(self):
        for name in ("k_star", "k_plus", "gamma", "delta", "theta", "a"):
            check_positive(getattr(self, name), name)
        for name in ("c_star", "b"):
            check_positive(getattr(self, name), name, strict=False)

    def tl_margin(self, rho):
        return rho - (1.0 - self.theta) * self.gamma

    def validate(self, rho):
        if self.tl_margin(rho) <= 0:
            raise ValueError(
                f"rho - (1 - theta) * gamma = {self.tl_margin(rho):.6g} must be > 0")
        return self


@dataclass
class Verdict:
    assumption: int
    status: str
    witness: Optional[dict] = None
    clauses: list = field(default_factory=list)

    def to_dict(self):
        return {"assumption": self.assumption, "status": self.status,
                "witness": self.witness,
                "clauses": [dict(name=n, status=s, detail=d) for n, s, d in self.clauses]}


@dataclass
class AssumptionReport:
    verdicts: list
    sample_count: int

    def status(self, assumption):
        for v in self.verdicts:
            if v.assumption == assumption:
                return v.status
        raise KeyError(assumption)

    def failing(self):
        return [v.assumption for v in self.verdicts if v.status == FAIL]

    @property
    def ok(self):
        return not self.failing()

    def to_dict(self):
        return {"sample_count": self.sample_count,
                "verdicts": [v.to_dict() for v in self.verdicts]}


# ---------------------------------------------------------------------------
# Builtin families
# ---------------------------------------------------------------------------

def crra_utility(theta, scale=1.0, shift=0.0):
    """``u(c, k) = scale * u_theta(c) + shift`` as a ScalarField2."""
    return ScalarField2(
        eval=lambda c, k: scale * _crra(theta, c) + shift + 0.0 * np.asarray(k, dtype=float),
        d_dx=lambda c, k: scale * _crra_prime(theta, c) + 0.0 * np.asarray(k, dtype=float),
        d_dy=lambda c, k: 0.0 * np.asarray(c, dtype=float) * np.asarray(k, dtype=float),
        label="log" if abs(theta - 1) < THETA_LOG_SWITCH else f"crra({theta:g})",
    )


def ces_utility(A, r):
    """Capital-in-utility CES ``u(c, k) = (c**r + k**r) ** (A / r)``."""
    if not 0 < A < 1 or r >= 1 or r == 0:
        raise ValueError("ces_utility needs 0 < A < 1 and r < 1, r != 0")

    def u(c, k):
        c = np.asarray(c, dtype=float)
        k = np.asarray(k, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = (c ** r + k ** r) ** (A / r)
        if r < 0:
            out = np.where((c == 0) | (k == 0), 0.0, out)
        return out

    def u_c(c, k):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return A * (c ** r + k ** r) ** (A / r - 1.0) * c ** (r - 1.0)

    def u_k(c, k):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return A * (c ** r + k ** r) ** (A / r - 1.0) * k ** (r - 1.0)

    return ScalarField2(u, u_c, u_k, label=f"ces(A={A:g},r={r:g})")


def default_c_cap(technology, k_hi):
    """Consumption bracket with ``F(k_hi, c_cap) < -F(k_hi, 0)``, padded 4x."""
    f0 = float(technology.eval(k_hi, 0.0))
    target = -abs(f0)
    c = 1e-3 * max(k_hi, 1.0)
    for _ in range(200):
        if float(technology.eval(k_hi, c)) < target:
            return 4.0 * c
        c *= 2.0
    raise ValueError("could not find a consumption bracket; F may not decrease in c")


def _linear_technology(gamma):
    return ScalarField2(
        eval=lambda k, c: gamma * np.asarray(k, dtype=float) - np.asarray(c, dtype=float),
        d_dx=lambda k, c: gamma + 0.0 * np.asarray(k, dtype=float) * np.asarray(c, dtype=float),
        d_dy=lambda k, c: -1.0 + 0.0 * np.asarray(k, dtype=float) * np.asarray(c, dtype=float),
        label=f"ak({gamma:g})",
    )


def _finish(rho, utility, technology, k_domain, c_cap, d1, d2, rck, label):
    if c_cap is None:
        c_cap = default_c_cap(technology, k_domain[1])
    return ModelSpec(rho=float(rho), utility=utility, technology=technology,
                     k_domain=tuple(float(k) for k in k_domain), c_cap=float(c_cap),
                     d1=float(d1), d2=float(d2), rck=rck, label=label)


def make_ak_crra(gamma, theta, rho, k_domain=(0.1, 10.0), c_cap=None):
    """AK technology ``F = gamma k - c`` with CRRA utility of consumption."""
    gamma = check_positive(gamma, "gamma")
    theta = check_positive(theta, "theta")
    rho = check_positive(rho, "rho")
    if rho - (1.0 - theta) * gamma <= 0:
        raise ValueError("AK-CRRA value function is infinite unless rho - (1 - theta) gamma > 0")
    rck = RCKForm(f=lambda k: gamma * np.asarray(k, dtype=float),
                  f_prime=lambda k: gamma + 0.0 * np.asarray(k, dtype=float), d=0.0,
                  u_prime=lambda c: _crra_prime(theta, c),
                  u_second=lambda c: _crra_second(theta, c))
    return _finish(rho, crra_utility(theta), _linear_technology(gamma), k_domain, c_cap,
                   0.0, 1.0, rck, f"ak_crra(gamma={gamma:g},theta={theta:g})")


def make_log_ak(gamma, rho, k_domain=(0.1, 10.0), c_cap=None):
    """Logarithmic AK model: ``u = log c``, ``F = gamma k - c``, ``gamma > rho``."""
    gamma = check_positive(gamma, "gamma")
    rho = check_positive(rho, "rho")
    if gamma <= rho:
        raise ValueError(f"log-AK model needs gamma > rho, got gamma={gamma}, rho={rho}")
    model = make_ak_crra(gamma, 1.0, rho, k_domain, c_cap)
    from dataclasses import replace
    return replace(model, label=f"log_ak(gamma={gamma:g})")


def make_rck(f, d, u, rho, f_prime=None, u_prime=None, u_second=None,
             k_domain=(0.1, 10.0), c_cap=None, label="rck", n_check=64):
    """RCK technology ``F(k, c) = f(k) - d k - c`` around a given utility.

    ``f`` is a one-dimensional production function with ``f(0) = 0``; it is
    sampled for monotonicity on the capital domain.
    """
    d = check_positive(d, "d", strict=False)
    rho = float(rho)
    if abs(float(f(0.0))) > 1e-12:
        raise ValueError(f"production must satisfy f(0) = 0, got f(0) = {float(f(0.0))}")
    ks = np.linspace(0.0, k_domain[1], n_check)
    fk = np.asarray([float(f(k)) for k in ks])
    if np.any(np.diff(fk) < -1e-12 * max(1.0, np.max(np.abs(fk)))):
        raise ValueError("production function must be nondecreasing on the sampled domain")

    if f_prime is None:
        def f_prime(k):
            k = np.asarray(k, dtype=float)
            h = 1e-6 * np.maximum(k, 1e-3)
            return (f(k + h) - f(np.maximum(k - h, 0.0))) / (k + h - np.maximum(k - h, 0.0))

    technology = ScalarField2(
        eval=lambda k, c: f(np.asarray(k, dtype=float)) - d * np.asarray(k, dtype=float)
        - np.asarray(c, dtype=float),
        d_dx=lambda k, c: f_prime(np.asarray(k, dtype=float)) - d + 0.0 * np.asarray(c, dtype=float),
        d_dy=lambda k, c: -1.0 + 0.0 * np.asarray(k, dtype=float) * np.asarray(c, dtype=float),
        label="rck",
    )
    if u_prime is None:
        def u_prime(c):
            return u.partial_x(c, 1.0)
    rck = RCKForm(f=f, f_prime=f_prime, d=d, u_prime=u_prime, u_second=u_second)
    return _finish(rho, u, technology, k_domain, c_cap, d, 1.0, rck, label)


def make_rck_cobb_douglas(alpha, d, rho, theta=1.0, tfp=1.0, k_domain=(0.2, 10.0), c_cap=None):
    """RCK model with ``f(k) = tfp * k**alpha`` and CRRA utility."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")

    def f(k):
        return tfp * np.maximum(np.asarray(k, dtype=float), 0.0) ** alpha

    def f_prime(k):
        with np.errstate(divide="ignore"):
            return tfp * alpha * np.asarray(k, dtype=float) ** (alpha - 1.0)

    return make_rck(f, d, crra_utility(theta), rho, f_prime=f_prime,
                    u_prime=lambda c: _crra_prime(theta, c),
                    u_second=lambda c: _crra_second(theta, c),
                    k_domain=k_domain, c_cap=c_cap,
                    label=f"rck_cobb_douglas(alpha={alpha:g},d={d:g},theta={theta:g})")


def make_linear_counterexample(rho, k_domain=(0.1, 10.0), c_cap=None):
    """``u(c) = c``, ``F(k, c) = k - c``: the model whose HJB misbehaves."""
    rho = check_positive(rho, "rho")
    utility = ScalarField2(
        eval=lambda c, k: np.asarray(c, dtype=float) + 0.0 * np.asarray(k, dtype=float),
        d_dx=lambda c, k: 1.0 + 0.0 * np.asarray(c, dtype=float) * np.asarray(k, dtype=float),
        d_dy=lambda c, k: 0.0 * np.asarray(c, dtype=float) * np.asarray(k, dtype=float),
        label="linear",
    )
    rck = RCKForm(f=lambda k: np.asarray(k, dtype=float),
                  f_prime=lambda k: 1.0 + 0.0 * np.asarray(k, dtype=float), d=0.0,
                  u_prime=lambda c: 1.0 + 0.0 * np.asarray(c, dtype=float),
                  u_second=lambda c: 0.0 * np.asarray(c, dtype=float))
    return _finish(rho, utility, _linear_technology(1.0), k_domain, c_cap, 0.0, 1.0, rck,
                   f"linear_counterexample(rho={rho:g})")


def make_magic_model(k_domain=(0.01, 10.0)):
    """``rho = 1``, ``F = sqrt(k) - c``, ``u = -1/sqrt(c)`` (u = u_theta/2 - 1, theta = 3/2)."""
    return make_rck(lambda k: np.sqrt(np.maximum(np.asarray(k, dtype=float), 0.0)), 0.0,
                    crra_utility(1.5, scale=0.5, shift=-1.0), 1.0,
                    f_prime=lambda k: 0.5 / np.sqrt(np.asarray(k, dtype=float)),
                    u_prime=lambda c: 0.5 * _crra_prime(1.5, c),
                    u_second=lambda c: 0.5 * _crra_second(1.5, c),
                    k_domain=k_domain, label="magic_of_capital")


# ---------------------------------------------------------------------------
# Assumption checks
# ---------------------------------------------------------------------------

def _sampling_sizes(grid):
    if grid is None:
        grid = 12
    if np.isscalar(grid):
        n_k = n_c = int(grid)
    else:
        n_k, n_c = (int(g) for g in grid)
    if n_k < 8 or n_c < 8:
        raise ValueError("assumption sampling needs at least 8 points per axis")
    return n_k, n_c


def _first_violation(mask, points):
    idx = np.argwhere(mask)
    if idx.size == 0:
        return None
    return tuple(float(p[tuple(idx[0])]) for p in points)


def _midpoint_concavity(fn, xs, ys, tol):
    """Check ``fn(mid) >= (fn(a) + fn(b)) / 2`` over all sampled pairs."""
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    px, py = X.ravel(), Y.ravel()
    vals = np.asarray(fn(px, py), dtype=float)
    ok = np.isfinite(vals)
    px, py, vals = px[ok], py[ok], vals[ok]
    i, j = np.triu_indices(px.size, k=1)
    mx, my = 0.5 * (px[i] + px[j]), 0.5 * (py[i] + py[j])
    vm = np.asarray(fn(mx, my), dtype=float)
    gap = 0.5 * (vals[i] + vals[j]) - vm
    scale = tol * (1.0 + np.abs(vm))
    bad = gap > scale
    if np.any(bad):
        n = int(np.argmax(bad))
        return {"point_a": (float(px[i[n]]), float(py[i[n]])),
                "point_b": (float(px[j[n]]), float(py[j[n]])),
                "inequality": "midpoint concavity", "gap": float(gap[n])}
    return None


def _clause(clauses, name, status, detail=""):
    clauses.append((name, status, detail))
    return status


def _combine(assumption, clauses, witness):
    statuses = [s for _, s, _ in clauses]
    if FAIL in statuses:
        status = FAIL
    elif UNKNOWN in statuses:
        status = UNKNOWN
    else:
        status = PASS
    return Verdict(assumption, status, witness if status == FAIL else None, clauses)


def check_assumptions(model, grid=12, a6=None, which=(1, 2, 3, 4, 5, 6, 7), tol=1e-9):
    """Check the standing conditions A1-A7 by finite sampling.

    Parameters
    ----------
    model : ModelSpec
    grid : int or (int, int)
        Sample points per axis over ``[k_lo, k_hi] x (0, c_cap]``.
    a6 : Assumption6Params, optional
        Parameters for condition A6; without them A6 is reported unknown.
    which : iterable of int
        Subset of assumptions to check.

    Returns
    -------
    AssumptionReport
        ``pass`` means pass-on-samples only. Limit conditions (the Inada
        limits of A4) are never reported as passing.
    """
    from .diagnostics import subgradient_interval

    n_k, n_c = _sampling_sizes(grid)
    k_lo, k_hi = model.k_domain
    ks = np.geomspace(k_lo, k_hi, n_k)
    cs = np.geomspace(1e-3 * model.c_cap, model.c_cap, n_c)
    K, C = np.meshgrid(ks, cs, indexing="ij")
    verdicts = []
    which = set(which)

    with np.errstate(all="ignore"):
        if 1 in which:
            clauses = []
            st = _clause(clauses, "rho > 0", PASS if model.rho > 0 else FAIL, f"rho={model.rho}")
            verdicts.append(_combine(1, clauses, None if st == PASS else
                                     {"point": None, "inequality": f"rho = {model.rho} <= 0"}))

        if 2 in which:
            clauses, witness = [], None
            U = np.asarray(model.u(C, K), dtype=float)
            if not np.all(np.isfinite(U)):
                bad = _first_violation(~np.isfinite(U), (C, K))
                _clause(clauses, "finite on positive quadrant", FAIL, str(bad))
                witness = witness or {"point": bad, "inequality": "u(c,k) finite for c,k > 0"}
            w = _midpoint_concavity(model.u, cs, ks, 1e-9)
            _clause(clauses, "concave", FAIL if w else PASS, "" if not w else str(w))
            witness = witness or w
            dc = np.diff(U, axis=1)
            dk = np.diff(U, axis=0)
            if np.any(dk < -tol * (1 + np.abs(U[1:]))):
                bad = _first_violation(dk < -tol * (1 + np.abs(U[1:])), (C[1:], K[1:]))
                _clause(clauses, "nondecreasing in k", FAIL, str(bad))
                witness = witness or {"point": bad, "inequality": "u(c,k) nondecreasing in k"}
            else:
                _clause(clauses, "nondecreasing in k", PASS)
            if np.any(dc <= 0):
                bad = _first_violation(dc <= 0, (C[:, 1:], K[:, 1:]))
                _clause(clauses, "increasing in c", FAIL, str(bad))
                witness = witness or {"point": bad, "inequality": "u(c,k) increasing in c"}
            else:
                _clause(clauses, "increasing in c", PASS)
            u0 = np.asarray(model.u(cs, np.zeros_like(cs)), dtype=float)
            if np.any(np.isfinite(u0)):
                c_ok = float(cs[np.argmax(np.isfinite(u0))])
                _clause(clauses, "u(c,0) > -inf for some c", PASS, f"c={c_ok:g}")
            else:
                _clause(clauses, "u(c,0) > -inf for some c", FAIL)
                witness = witness or {"point": (float(cs[-1]), 0.0),
                                      "inequality": "u(c,0) > -inf for some c > 0"}
            verdicts.append(_combine(2, clauses, witness))

        if 3 in which:
            clauses, witness = [], None
            ks0 = np.concatenate([[0.0], ks])
            cs0 = np.concatenate([[0.0], cs])
            K0, C0 = np.meshgrid(ks0, cs0, indexing="ij")
            Fv = np.asarray(model.F(K0, C0), dtype=float)
            w = _midpoint_concavity(model.F, ks0, cs0, 1e-9)
            _clause(clauses, "concave", FAIL if w else PASS, "" if not w else str(w))
            witness = witness or w
            f00 = float(model.F(0.0, 0.0))
            if f00 != 0.0:
                _clause(clauses, "F(0,0) = 0", FAIL, f"F(0,0)={f00}")
                witness = witness or {"point": (0.0, 0.0), "inequality": f"F(0,0) = {f00} != 0"}
            else:
                _clause(clauses, "F(0,0) = 0", PASS)
            dcF = np.diff(Fv, axis=1)
            if np.any(dcF >= 0):
                bad = _first_violation(dcF >= 0, (K0[:, 1:], C0[:, 1:]))
                _clause(clauses, "decreasing in c", FAIL, str(bad))
                witness = witness or {"point": bad, "inequality": "F(k,c) decreasing in c"}
            else:
                _clause(clauses, "decreasing in c", PASS)
            lower = -model.d1 * K0 - model.d2 * C0
            viol = (Fv <= lower) & (K0 > 0)
            if np.any(viol):
                bad = _first_violation(viol, (K0, C0))
                _clause(clauses, "F > -d1 k - d2 c", FAIL, str(bad))
                witness = witness or {"point": bad, "inequality": "F(k,c) > -d1 k - d2 c"}
            else:
                _clause(clauses, "F > -d1 k - d2 c", PASS)
            grows = np.any(Fv[1:, :] > Fv[0:1, :], axis=0)
            if not np.all(grows):
                c_bad = float(cs0[np.argmin(grows)])
                _clause(clauses, "exists k: F(k,c) > F(0,c)", FAIL, f"c={c_bad:g}")
                witness = witness or {"point": (None, c_bad),
                                      "inequality": "exists k > 0 with F(k,c) > F(0,c)"}
            else:
                _clause(clauses, "exists k: F(k,c) > F(0,c)", PASS, "sampled c only")
            verdicts.append(_combine(3, clauses, witness))

        if 4 in which:
            clauses, witness = [], None
            UC = np.asarray(model.u_c(C, K), dtype=float)
            duc = np.diff(UC, axis=1)
            if np.any(duc >= 0):
                bad = _first_violation(duc >= 0, (C[:, 1:], K[:, 1:]))
                _clause(clauses, "du/dc decreasing in c", FAIL, str(bad))
                witness = {"point": bad, "inequality": "du/dc(c,k) strictly decreasing in c",
                           "du_dc": float(model.u_c(bad[0], bad[1]))}
            else:
                _clause(clauses, "du/dc decreasing in c", PASS)
            k_mid = float(np.sqrt(k_lo * k_hi))
            decades = model.c_cap * 10.0 ** np.arange(-6, 4)
            trend = np.asarray(model.u_c(decades, np.full_like(decades, k_mid)), dtype=float)
            evidence = {"c": decades.tolist(), "du_dc": trend.tolist(), "k": k_mid}
            rising = bool(np.all(np.diff(trend) < 0))
            detail = ("monotone trend supports the limit" if rising
                      else "no monotone trend on sampled decades")
            _clause(clauses, "lim_{c->0} du/dc = +inf", UNKNOWN, detail)
            _clause(clauses, "lim_{c->inf} du/dc = 0", UNKNOWN, detail)
            if witness is not None:
                witness["trend"] = evidence
            uk = np.asarray(model.u_k(C, K), dtype=float)
            _clause(clauses, "du/dk bounded on (0, M]", UNKNOWN if np.all(np.isfinite(uk)) else FAIL,
                    f"max |du/dk| on samples = {float(np.nanmax(np.abs(uk))):.6g}")
            v = _combine(4, clauses, witness)
            v.clauses.append(("trend evidence", UNKNOWN, str(evidence)))
            verdicts.append(v)

        if 5 in which:
            clauses, witness = [], None
            h = 1e-5 * C
            right = (model.F(K, C + h) - model.F(K, C)) / h
            left = (model.F(K, C) - model.F(K, C - h)) / h
            kink = np.abs(right - left) > 1e-3 * (1.0 + np.abs(right))
            if np.any(kink):
                bad = _first_violation(kink, (K, C))
                _clause(clauses, "F continuously differentiable in c", FAIL, str(bad))
                witness = {"point": bad, "inequality": "left and right c-derivatives agree"}
            else:
                _clause(clauses, "F continuously differentiable in c", PASS)
            verdicts.append(_combine(5, clauses, witness))

        if 6 in which:
            verdicts.append(_check_a6(model, a6, ks, cs, subgradient_interval, tol))

        if 7 in which:
            clauses, witness = [], None
            hk = 1e-5 * K
            ok = True
            for part in (lambda k, c: model.F_c(k, c), lambda k, c: model.u_c(c, k)):
                r = (part(K + hk, C) - part(K, C)) / hk
                l_ = (part(K, C) - part(K - hk, C)) / hk
                if np.any(~np.isfinite(r)) or np.any(np.abs(r - l_) > 1e-3 * (1 + np.abs(r))):
                    ok = False
            _clause(clauses, "dF/dc and du/dc differentiable in k", PASS if ok else FAIL)
            if not ok:
                witness = {"point": None, "inequality": "dF/dc, du/dc continuously differentiable in k"}
            c_all = np.concatenate([[0.0], cs])
            best_k, best_val = None, -np.inf
            for k in ks:
                dplus = min(subgradient_interval(lambda x, c=c: model.F(x, c), k,
                                                 1e-4 * k).d_plus for c in c_all)
                if dplus > best_val:
                    best_k, best_val = float(k), float(dplus)
            # strict inequality, with a rounding margin so that equality fails
            if best_val > model.rho + 1e-9 * max(1.0, abs(model.rho)):
                _clause(clauses, "exists k: inf_c D_k+ F(k,c) > rho", PASS,
                        f"k={best_k:g}, inf D_k+F={best_val:.6g}")
            else:
                _clause(clauses, "exists k: inf_c D_k+ F(k,c) > rho", FAIL,
                        f"best k={best_k:g}, inf D_k+F={best_val:.6g}")
                witness = witness or {"point": (best_k, None),
                                      "inequality": f"inf_c D_k+F = {best_val:.6g} > rho = {model.rho}"}
            verdicts.append(_combine(7, clauses, witness))

    return AssumptionReport(verdicts, sample_count=int(n_k * n_c))


def _check_a6(model, a6, ks, cs, subgradient_interval, tol):
    clauses, witness = [], None
    if a6 is None:
        _clause(clauses, "parameters supplied", UNKNOWN, "no A6 parameters given")
        return Verdict(6, UNKNOWN, None, clauses)
    ks_, cs_, g, dl = a6.k_star, a6.c_star, a6.gamma, a6.delta
    f_star = float(model.F(ks_, cs_))

    def fail(name, inequality, point):
        nonlocal witness
        _clause(clauses, name, FAIL, inequality)
        witness = witness or {"point": point, "inequality": inequality}

    if f_star > 0:
        _clause(clauses, "F(k*,c*) > 0", PASS, f"{f_star:.6g}")
    else:
        fail("F(k*,c*) > 0", f"F(k*,c*) = {f_star:.6g} <= 0", (ks_, cs_))

    slack = 1e-6 * (1.0 + abs(g))
    hk = 1e-4 * ks_
    si = subgradient_interval(lambda x: model.F(x, cs_), ks_, hk)
    if si.d_plus - slack <= g <= si.d_minus + slack:
        _clause(clauses, "gamma in d_k F(k*,c*)", PASS, f"[{si.d_plus:.6g}, {si.d_minus:.6g}]")
    else:
        fail("gamma in d_k F(k*,c*)", f"gamma={g} not in [{si.d_plus:.6g}, {si.d_minus:.6g}]",
             (ks_, cs_))
    hc = 1e-4 * max(cs_, 1e-2)
    d_plus_c = float((model.F(ks_, cs_ + hc) - f_star) / hc)
    d_minus_c = np.inf if cs_ - hc <= 0 else float((f_star - model.F(ks_, cs_ - hc)) / hc)
    if d_plus_c - slack <= -dl <= d_minus_c + slack:
        _clause(clauses, "-delta in d_c F(k*,c*)", PASS)
    else:
        fail("-delta in d_c F(k*,c*)", f"-delta={-dl} not in [{d_plus_c:.6g}, {d_minus_c:.6g}]",
             (ks_, cs_))
    # supergradient inequality on every sample, including the k = 0 / c = 0 edges
    K, C = np.meshgrid(np.concatenate([[0.0], ks]), np.concatenate([[0.0], cs]), indexing="ij")
    sup = f_star + g * (K - ks_) - dl * (C - cs_)
    gap = np.asarray(model.F(K, C), dtype=float) - sup
    bad = gap > tol * (1 + np.abs(sup))
    if np.any(bad):
        fail("supergradient inequality", "F(k,c) <= F* + gamma(k-k*) - delta(c-c*)",
             _first_violation(bad, (K, C)))
    else:
        _clause(clauses, "supergradient inequality", PASS)

    dplus = subgradient_interval(lambda x: model.F(x, 0.0), a6.k_plus, 1e-4 * a6.k_plus).d_plus
    if 0 < dplus <= g + slack:
        _clause(clauses, "0 < D_k+F(k+,0) <= gamma", PASS, f"{dplus:.6g}")
    else:
        fail("0 < D_k+F(k+,0) <= gamma", f"D_k+F(k+,0) = {dplus:.6g}", (a6.k_plus, 0.0))

    margin = a6.tl_margin(model.rho)
    if margin > 0:
        _clause(clauses, "rho - (1-theta) gamma > 0", PASS, f"{margin:.6g}")
    else:
        fail("rho - (1-theta) gamma > 0", f"margin {margin:.6g} <= 0", None)

    K, C = np.meshgrid(ks, cs, indexing="ij")
    lhs = np.asarray(model.u(C, K), dtype=float)
    rhs = a6.a * _crra(a6.theta, C) + a6.b * _crra(a6.theta, K) + a6.cc
    bad = lhs > rhs + tol * (1 + np.abs(rhs))
    if np.any(bad):
        fail("u <= a u_theta(c) + b u_theta(k) + C", "upper envelope violated",
             _first_violation(bad, (C, K)))
    else:
        _clause(clauses, "u <= a u_theta(c) + b u_theta(k) + C", PASS)
    return _combine(6, clauses, witness)
