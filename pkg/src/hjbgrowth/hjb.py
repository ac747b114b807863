"""HJB equation ``rho V = sup_c {F(k, c) V'(k) + u(c, k)}`` on a capital grid.

The solver is an implicit upwind finite-difference scheme with the policy
recomputed every sweep: forward differences where the drift is positive,
backward differences where it is negative, and the zero-drift price where
neither applies. Each sweep solves one tridiagonal system.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.linalg import solve_banded
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_capital, check_grid, check_positive
from .model import FAIL, check_assumptions
from .ode import IntegratorConfig, pure_accumulation_path
from .policy import MAX_EXPANSIONS, policy_map

logger = logging.getLogger(__name__)

SATISFIED, VIOLATED, INCONCLUSIVE = "satisfied", "violated", "inconclusive"
MIN_NODES = 32
DECAY_FACTOR = 1.0 - 1e-3


class NonConvergence(RuntimeError):
    def __init__(self, max_residual, iterations, diagnostic=""):
        self.max_residual, self.iterations, self.diagnostic = max_residual, iterations, diagnostic
        msg = f"HJB iteration stopped after {iterations} sweeps, max residual {max_residual:.6g}"
        super().__init__(msg + (f": {diagnostic}" if diagnostic else ""))


class DegenerateGrid(RuntimeError):
    pass


class BoundError(ValueError):
    """The analytic upper bound is undefined (non-positive log/power argument)."""


# ---------------------------------------------------------------------------
# value grid
# ---------------------------------------------------------------------------

def _tail_exponent(k0, k1, p0, p1):
    """Elasticity ``beta`` of ``V'(k) ~ k**-beta`` from two derivative samples."""
    if p0 > 0 and p1 > 0:
        beta = -np.log(p1 / p0) / np.log(k1 / k0)
        return float(np.clip(beta, 0.0, 10.0))
    return 0.0


def _tail_integral(k_ref, p_ref, beta, k):
    """``int_{k_ref}^k p_ref (s/k_ref)**-beta ds``."""
    x = np.asarray(k, dtype=float) / k_ref
    with np.errstate(divide="ignore"):
        if abs(1.0 - beta) < 1e-10:
            return p_ref * k_ref * np.log(x)
        return p_ref * k_ref * np.expm1((1.0 - beta) * np.log(x)) / (1.0 - beta)


class ValueGrid:
    """Node values of ``V`` with a derivative oracle.

    Between nodes ``V`` is the monotone cubic (PCHIP) interpolant and
    ``deriv`` its analytic derivative. Beyond the end nodes ``V'`` is
    continued as a power law fitted to the two outermost node derivatives,
    which keeps ``log``- and ``k**(1-theta)``-type tails in shape.

    ``node_derivs`` holds the one-sided derivatives the solver actually used;
    :meth:`value_and_deriv` returns them at exact node locations so that
    residual certificates reproduce the discrete equation.
    """

    def __init__(self, nodes, values=None, node_derivs=None, meta=None):
        nodes = check_grid(nodes, min_nodes=2)
        values = np.zeros_like(nodes) if values is None else np.asarray(values, dtype=float)
        if values.shape != nodes.shape:
            raise ValueError("values and nodes must have the same length")
        self.nodes = nodes
        self.values = values
        self._interp = PchipInterpolator(nodes, values, extrapolate=False)
        self._dinterp = self._interp.derivative()
        if node_derivs is None:
            node_derivs = self._dinterp(nodes)
        self.node_derivs = np.asarray(node_derivs, dtype=float)
        for arr in (self.nodes, self.values, self.node_derivs):
            arr.setflags(write=False)
        self.meta = dict(meta or {})
        # tail elasticities from the outermost difference quotients at their midpoints
        if nodes.size >= 3:
            d = np.diff(values) / np.diff(nodes)
            m = np.sqrt(nodes[1:] * nodes[:-1])
            self._beta_lo = _tail_exponent(m[0], m[1], d[0], d[1])
            self._beta_hi = _tail_exponent(m[-2], m[-1], d[-2], d[-1])
        else:
            self._beta_lo = self._beta_hi = 0.0

    @classmethod
    def template(cls, k_lo, k_hi, n, spacing="log"):
        """Empty grid of ``n`` nodes on ``[k_lo, k_hi]``."""
        k_lo, k_hi = check_positive(k_lo, "k_lo"), check_positive(k_hi, "k_hi")
        if spacing == "log":
            nodes = np.geomspace(k_lo, k_hi, int(n))
        elif spacing == "linear":
            nodes = np.linspace(k_lo, k_hi, int(n))
        else:
            raise ValueError(f"unknown spacing {spacing!r}")
        return cls(nodes)

    @classmethod
    def from_function(cls, nodes, fn, dfn=None):
        nodes = check_grid(nodes)
        return cls(nodes, fn(nodes), None if dfn is None else dfn(nodes))

    @property
    def domain(self):
        return float(self.nodes[0]), float(self.nodes[-1])

    @property
    def size(self):
        return self.nodes.size

    def value(self, k):
        k = np.asarray(k, dtype=float)
        out = np.asarray(self._interp(k), dtype=float)
        lo, hi = self.nodes[0], self.nodes[-1]
        below, above = k < lo, k > hi
        if np.any(below):
            out = np.where(below, self.values[0] + _tail_integral(
                lo, self.node_derivs[0], self._beta_lo, np.where(below, k, lo)), out)
        if np.any(above):
            out = np.where(above, self.values[-1] + _tail_integral(
                hi, self.node_derivs[-1], self._beta_hi, np.where(above, k, hi)), out)
        return out if out.ndim else float(out)

    def deriv(self, k):
        k = np.asarray(k, dtype=float)
        out = np.asarray(self._dinterp(k), dtype=float)
        lo, hi = self.nodes[0], self.nodes[-1]
        below, above = k < lo, k > hi
        with np.errstate(divide="ignore"):
            if np.any(below):
                out = np.where(below, self.node_derivs[0] * (k / lo) ** -self._beta_lo, out)
            if np.any(above):
                out = np.where(above, self.node_derivs[-1] * (k / hi) ** -self._beta_hi, out)
        return out if out.ndim else float(out)

    def value_and_deriv(self, k):
        """``(V(k), V'(k))``, using the solver's node derivative at exact nodes."""
        k = float(k)
        i = int(np.searchsorted(self.nodes, k))
        if i < self.nodes.size and self.nodes[i] == k:
            return float(self.values[i]), float(self.node_derivs[i])
        return float(self.value(k)), float(self.deriv(k))

    def __call__(self, k):
        return self.value(k)

    def __repr__(self):
        return f"ValueGrid(n={self.size}, domain={self.domain})"


# ---------------------------------------------------------------------------
# configuration and certificate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolveConfig:
    max_iters: int = 200
    residual_tol: float = 1e-8
    relaxation: float = 1.0
    scheme: str = "upwind_implicit"
    dt: float = 1e4

    def __post_init__(self):
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be >= 1")
        check_positive(self.residual_tol, "residual_tol")
        check_positive(self.dt, "dt")
        if not 0 < self.relaxation <= 1:
            raise ValueError("relaxation must lie in (0, 1]")
        if self.scheme not in ("upwind_implicit", "upwind_explicit"):
            raise ValueError(f"unknown scheme {self.scheme!r}")


@dataclass
class CertificateReport:
    in_class_V: bool
    increasing: bool
    concave: bool
    growth_condition: str
    growth_samples: list
    max_abs_residual: float
    residual_profile: list
    growth_tol: float
    horizon: float
    iterations: Optional[int] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "in_class_V": self.in_class_V, "increasing": self.increasing,
            "concave": self.concave, "growth_condition": self.growth_condition,
            "growth_samples": self.growth_samples, "growth_tol": self.growth_tol,
            "horizon": self.horizon, "max_abs_residual": self.max_abs_residual,
            "residual_profile": self.residual_profile, "iterations": self.iterations,
            **self.extra,
        }


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------

def _value_and_deriv(V, k):
    if hasattr(V, "value_and_deriv"):
        return V.value_and_deriv(k)
    return float(V.value(k)) if hasattr(V, "value") else float(V(k)), float(V.deriv(k))


def hjb_residual(model, V, k):
    """``sup_c {F(k, c) V'(k) + u(c, k)} - rho V(k)`` as an extended real.

    Returns ``+inf`` when the supremum is unbounded, i.e. when the
    maximiser's bracket fails.
    """
    k = check_positive(k, "k")
    v, p = _value_and_deriv(V, k)
    c, h, _, _, _, failed = policy_map(model, np.array([k]), np.array([p]))
    if failed[0]:
        return np.inf
    return float(h[0] - model.rho * v)


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------

def _zero_drift_consumption(model, k):
    """``c0(k)`` with ``F(k, c0) = 0``; ``nan`` where ``F(k, 0) <= 0``."""
    lo = np.zeros_like(k)
    hi = np.full_like(k, model.c_cap)
    ok = np.asarray(model.F(k, lo), dtype=float) > 0
    for _ in range(60):
        grow = ok & (np.asarray(model.F(k, hi), dtype=float) > 0)
        if not np.any(grow):
            break
        hi = np.where(grow, 2.0 * hi, hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        pos = np.asarray(model.F(k, mid), dtype=float) > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
        if np.all(hi - lo <= 4 * np.spacing(hi)):
            break
    return np.where(ok, 0.5 * (lo + hi), np.nan)


def _initial_values(model, nodes, init, a6):
    if isinstance(init, str):
        if init == "flat":
            c0 = _zero_drift_consumption(model, nodes)
            c0 = np.where(np.isfinite(c0), c0, 1e-3 * model.c_cap)
            with np.errstate(all="ignore"):
                v0 = np.asarray(model.u(c0, nodes), dtype=float) / model.rho
            if not np.all(np.isfinite(v0)):
                raise ValueError("flat initialisation is not finite on the grid")
            return v0
        if init == "bound":
            if a6 is None:
                raise ValueError("init='bound' needs A6 parameters")
            return assumption6_upper_bound(model, a6, nodes)
        raise ValueError(f"unknown init {init!r}")
    v0 = np.asarray(init, dtype=float)
    if v0.shape != nodes.shape:
        raise ValueError("init array must match the grid")
    return v0


def _loglog_factor(nodes, V, side, to_node):
    """Log-log extrapolation factor for difference quotients at a grid end.

    With ``to_node`` the outermost difference is carried to the end node
    (giving the one-sided derivative used there); otherwise the second
    outermost difference is carried to the outermost midpoint (giving the
    boundary row for outward drift).
    """
    k = nodes[-4:] if side == "hi" else nodes[:4][::-1]
    v = V[-4:] if side == "hi" else V[:4][::-1]
    d = np.diff(v) / np.diff(k)          # ordered from the inside out
    m = np.sqrt(k[1:] * k[:-1])
    if not np.all(d > 0):
        return 1.0
    if to_node:
        e = np.log(k[3] / m[2]) / np.log(m[2] / m[1])
        return float(np.clip((d[2] / d[1]) ** e, 0.5, 2.0))
    e = np.log(m[2] / m[1]) / np.log(m[1] / m[0])
    return float(np.clip((d[1] / d[0]) ** e, 0.5, 2.0))


class _Sweep:
    """Upwind policy evaluation on the current iterate.

    At an end node the drift may point out of the grid. The HJB equation is
    then replaced by an extrapolation row that continues the difference
    quotients log-linearly, since the information for that node lies
    outside the truncated domain.
    """

    def __init__(self, model, nodes, V, c_zero, p_zero):
        n = nodes.size
        h = np.diff(nodes)
        D = np.diff(V) / h
        w_lo = _loglog_factor(nodes, V, "lo", True)
        w_hi = _loglog_factor(nodes, V, "hi", True)
        # forward differences exist at 0..n-2, backward at 1..n-1
        pf = np.full(n, np.nan)
        pb = np.full(n, np.nan)
        pf[:-1] = D
        pb[1:] = D
        pf[0] = w_lo * D[0]
        pb[-1] = w_hi * D[-1]
        k = nodes

        def evaluate(p):
            valid = np.isfinite(p)
            c, _, _, _, _, failed = policy_map(model, k, np.where(valid, p, 1.0))
            drift = np.asarray(model.F(k, c), dtype=float)
            return c, drift, failed & valid, valid

        cf, sf, ff, vf = evaluate(pf)
        cb, sb, fb, vb = evaluate(pb)
        use_f = vf & ~ff & (sf > 0)
        use_b = vb & ~fb & (sb < 0) & ~use_f
        use_0 = ~use_f & ~use_b & np.isfinite(p_zero)
        # end nodes: upwind one-sided difference, or extrapolation for outward drift
        self.extrap_lo = bool(vf[0] and not ff[0] and sf[0] < 0)
        self.extrap_hi = bool(vb[-1] and not fb[-1] and sb[-1] > 0)
        use_f[-1] = use_b[0] = False
        use_f[0] = bool(vf[0] and not ff[0] and sf[0] >= 0)
        use_b[-1] = bool(vb[-1] and not fb[-1] and sb[-1] <= 0)
        use_0[0] = use_0[0] and not (use_f[0] or self.extrap_lo)
        use_0[-1] = use_0[-1] and not (use_b[-1] or self.extrap_hi)
        ends = np.zeros(n, dtype=bool)
        ends[0], ends[-1] = self.extrap_lo, self.extrap_hi
        self.both_failed = (ff | ~vf) & (fb | ~vb) & ~use_0 & ~ends
        self.stuck = ~use_f & ~use_b & ~use_0 & ~ends
        self.hjb_rows = ~ends

        self.p = np.where(use_f, pf, np.where(use_b, pb, p_zero))
        self.p[0] = pf[0] if self.extrap_lo else self.p[0]
        self.p[-1] = pb[-1] if self.extrap_hi else self.p[-1]
        self.c = np.where(use_f, cf, np.where(use_b, cb, c_zero))
        self.c[0] = cf[0] if self.extrap_lo else self.c[0]
        self.c[-1] = cb[-1] if self.extrap_hi else self.c[-1]
        self.drift = np.where(use_f, sf, np.where(use_b, sb, 0.0))
        with np.errstate(all="ignore"):
            self.u = np.asarray(model.u(self.c, k), dtype=float)
        fwd_scale = np.ones(n)
        fwd_scale[0] = w_lo
        bwd_scale = np.ones(n)
        bwd_scale[-1] = w_hi
        hf = np.append(h, np.inf)
        hb = np.insert(h, 0, np.inf)
        self.up = np.where(use_f, self.drift * fwd_scale / hf, 0.0)
        self.lo = np.where(use_b, -self.drift * bwd_scale / hb, 0.0)
        self.diag = -(self.up + self.lo)
        self.h = h
        self.w_row_lo = _loglog_factor(nodes, V, "lo", False)
        self.w_row_hi = _loglog_factor(nodes, V, "hi", False)

    def generator_times(self, V):
        out = self.diag * V
        out[:-1] += self.up[:-1] * V[1:]
        out[1:] += self.lo[1:] * V[:-1]
        return out

    def residual(self, model, V):
        r = self.u + self.generator_times(V) - model.rho * V
        D = np.diff(V) / self.h
        # extrapolation rows: mismatch of the outermost difference quotient
        if self.extrap_lo:
            r[0] = D[0] - self.w_row_lo * D[1]
        if self.extrap_hi:
            r[-1] = D[-1] - self.w_row_hi * D[-2]
        return r


def _explicit_step(model, sweep, V, r):
    """Local pseudo-time step ``V_i += r_i / (|A_ii| + rho)``; end rows are imposed directly."""
    V_new = V + r / (np.abs(sweep.diag) + model.rho)
    h = sweep.h
    D = np.diff(V_new) / h
    if sweep.extrap_hi:
        V_new[-1] = V_new[-2] + h[-1] * sweep.w_row_hi * D[-2]
    if sweep.extrap_lo:
        V_new[0] = V_new[1] - h[0] * sweep.w_row_lo * D[1]
    return V_new


def _solve_implicit(model, sweep, V, dt):
    """One implicit step ``(1/dt + rho - A) V' = u + V/dt`` with boundary rows."""
    n = V.size
    ab = np.zeros((5, n))            # banded storage for (l, u) = (2, 2)
    ab[2, :] = 1.0 / dt + model.rho - sweep.diag
    ab[1, 1:] = -sweep.up[:-1]
    ab[3, :-1] = -sweep.lo[1:]
    rhs = sweep.u + V / dt
    h = sweep.h
    if sweep.extrap_hi:
        w = sweep.w_row_hi
        # (V[n-1] - V[n-2]) / h[-1] - w (V[n-2] - V[n-3]) / h[-2] = 0
        ab[2, n - 1] = 1.0 / h[-1]
        ab[3, n - 2] = -1.0 / h[-1] - w / h[-2]
        ab[4, n - 3] = w / h[-2]
        rhs[-1] = 0.0
    if sweep.extrap_lo:
        w = sweep.w_row_lo
        # (V[1] - V[0]) / h[0] - w (V[2] - V[1]) / h[1] = 0
        ab[2, 0] = -1.0 / h[0]
        ab[1, 1] = 1.0 / h[0] + w / h[1]
        ab[0, 2] = -w / h[1]
        rhs[0] = 0.0
    return solve_banded((2, 2), ab, rhs)


def solve_hjb(model, grid=None, cfg=None, init="flat", a6=None, check=True,
              horizon=None, growth_tol=None):
    """Solve the HJB equation on a capital grid.

    Parameters
    ----------
    model : ModelSpec
    grid : ValueGrid, array of nodes, or None
        Node template (at least 32 nodes). ``None`` uses 400 log-spaced
        nodes on ``model.k_domain``.
    cfg : SolveConfig
    init : {"flat", "bound"} or array
        ``flat`` is ``u(c0(k), k) / rho`` with ``F(k, c0) = 0``; ``bound``
        starts from the analytic upper bound (needs ``a6``).
    check : bool
        Run the sampled A1-A5 checks first and refuse failing models.

    Returns
    -------
    (ValueGrid, CertificateReport)

    Raises
    ------
    NonConvergence
        After ``max_iters`` sweeps, or immediately with ``max_residual=inf``
        when the Hamiltonian supremum is unbounded at some node.
    DegenerateGrid
        If neither one-sided derivative admits a maximiser at some node.
    """
    cfg = cfg or SolveConfig()
    if grid is None:
        nodes = ValueGrid.template(*model.k_domain, 400).nodes
    elif isinstance(grid, ValueGrid):
        nodes = grid.nodes
    else:
        nodes = check_grid(grid)
    if nodes.size < MIN_NODES:
        raise ValueError(f"solve_hjb needs at least {MIN_NODES} nodes, got {nodes.size}")
    nodes = np.array(nodes, dtype=float)
    if nodes[-1] > model.k_domain[1] * (1 + 1e-12) or nodes[0] < model.k_domain[0] * (1 - 1e-12):
        model = model.with_domain(min(nodes[0], model.k_domain[0]),
                                  max(nodes[-1], model.k_domain[1]))

    if check:
        report = check_assumptions(model, which=(1, 2, 3, 4, 5))
        failing = report.failing()
        if failing:
            names = ", ".join(f"A{a}" for a in failing)
            raise NonConvergence(np.inf, 0, f"model fails {names} on samples; "
                                 "the Hamiltonian supremum may be unbounded")

    c_zero = _zero_drift_consumption(model, nodes)
    with np.errstate(all="ignore"):
        p_zero = -np.asarray(model.u_c(c_zero, nodes), dtype=float) / \
            np.asarray(model.F_c(nodes, c_zero), dtype=float)
    p_zero = np.where(np.isfinite(c_zero) & (p_zero > 0), p_zero, np.nan)

    V = _initial_values(model, nodes, init, a6)
    history = []
    res = np.inf
    sweep = None
    for it in range(1, int(cfg.max_iters) + 1):
        sweep = _Sweep(model, nodes, V, c_zero, p_zero)
        _guard(sweep, nodes, it)
        r = sweep.residual(model, V)
        res = float(np.max(np.abs(r)))
        history.append(res)
        logger.debug("sweep %d: max residual %.3e", it, res)
        if res < cfg.residual_tol:
            break
        if cfg.scheme == "upwind_implicit":
            V_new = _solve_implicit(model, sweep, V, cfg.dt)
        else:
            V_new = _explicit_step(model, sweep, V, r)
        V = (1.0 - cfg.relaxation) * V + cfg.relaxation * V_new
    else:
        raise NonConvergence(res, int(cfg.max_iters))

    grid_out = ValueGrid(nodes, V, sweep.p, meta={"iterations": it, "residual_history": history,
                                                  "c_policy": sweep.c.tolist()})
    cert = check_class_V(model, grid_out, horizon=horizon, growth_tol=growth_tol)
    cert.iterations = it
    return grid_out, cert


def _guard(sweep, nodes, it):
    if np.any(sweep.both_failed):
        i = int(np.argmax(sweep.both_failed))
        raise DegenerateGrid(
            f"no consumption maximiser for either one-sided derivative at k={nodes[i]:.6g}; "
            f"the Hamiltonian supremum is unbounded there (A4) or c_cap*{2 ** MAX_EXPANSIONS} is too small")
    if np.any(sweep.stuck):
        i = int(np.argmax(sweep.stuck))
        raise NonConvergence(np.inf, it, f"Hamiltonian supremum unbounded at k={nodes[i]:.6g} "
                             "(A4: marginal utility does not dominate the shadow price)")


# ---------------------------------------------------------------------------
# class-V certificate
# ---------------------------------------------------------------------------

def _growth_samples(model, V, horizon, k_bars):
    cfg = IntegratorConfig(t_end=horizon, rtol=1e-10, atol=1e-12, n_out=401)
    Ts = np.array([horizon / 4, horizon / 2, horizon])
    out = []
    for kb in k_bars:
        path = pure_accumulation_path(model, float(kb), cfg)
        k_T = np.interp(Ts, path.times, path.capital) if path.times[-1] >= horizon else None
        if k_T is None:
            vals = [np.nan] * 3
        else:
            with np.errstate(all="ignore"):
                vals = (np.exp(-model.rho * Ts) * np.asarray(V.value(k_T), dtype=float)).tolist()
        out.append({"k_bar": float(kb), "T": Ts.tolist(), "values": vals})
    return out


def _classify_growth(samples, tol):
    status = SATISFIED
    for s in samples:
        m = np.abs(np.asarray(s["values"], dtype=float))
        if not np.all(np.isfinite(m)):
            return VIOLATED
        decaying = bool(np.all(m[1:] <= DECAY_FACTOR * m[:-1]))
        if not decaying:
            if m[-1] < tol and np.all(m < tol):
                continue
            return VIOLATED
        if m[-1] >= tol:
            status = INCONCLUSIVE
    return status


def check_class_V(model, V, horizon=None, growth_tol=None, concavity_tol=1e-8):
    """Certify that a grid value function is increasing, concave and growth-limited.

    The growth condition ``exp(-rho T) V(k+(T, k_bar)) -> 0`` along the zero
    consumption path is sampled at ``T = horizon/4, horizon/2, horizon`` for
    ``k_bar`` at the two grid ends and the geometric midpoint. A decaying but
    still large final value is reported ``inconclusive``.

    Parameters
    ----------
    horizon : float, optional
        Defaults to ``30 / rho``.
    growth_tol : float, optional
        Defaults to ``1e-4 * |V(mid)|``.
    """
    if not isinstance(V, ValueGrid):
        raise TypeError("check_class_V expects a ValueGrid")
    horizon = 30.0 / model.rho if horizon is None else check_positive(horizon, "horizon")
    k_lo, k_hi = V.domain
    mid = float(np.sqrt(k_lo * k_hi))
    if growth_tol is None:
        growth_tol = 1e-4 * abs(float(V.value(mid)))
        if growth_tol == 0:
            growth_tol = 1e-12
    v = V.values
    dv = np.diff(v)
    increasing = bool(np.all(dv > 0))
    slopes = dv / np.diff(V.nodes)
    scale = max(1.0, float(np.max(np.abs(slopes))))
    concave = bool(np.all(np.diff(slopes) <= concavity_tol * scale))

    samples = _growth_samples(model, V, horizon, [k_lo, mid, k_hi])
    growth = _classify_growth(samples, growth_tol)

    interior = V.nodes[1:-1]
    profile = [hjb_residual(model, V, float(k)) for k in interior]
    max_res = float(np.max(np.abs(profile))) if profile else 0.0
    return CertificateReport(
        in_class_V=increasing and concave and growth == SATISFIED,
        increasing=increasing, concave=concave, growth_condition=growth,
        growth_samples=samples, max_abs_residual=max_res, residual_profile=profile,
        growth_tol=float(growth_tol), horizon=float(horizon))


# ---------------------------------------------------------------------------
# analytic upper bound
# ---------------------------------------------------------------------------

def assumption6_upper_bound(model, a6, k_bar):
    """Closed-form upper bound on the value function from the A6 parameters.

    With ``m = rho - (1 - theta) gamma`` and
    ``B(k) = k - k* + (delta c* + F(k*, c*)) / gamma`` the bound is
    ``a V3(k) + b V4(k) + C / rho`` where ``C* = m B / (theta delta)``,
    ``V3 = C*^(1-theta) theta / ((1-theta) m) - 1 / (rho (1-theta))`` and
    ``V4 = B^(1-theta) / ((1-theta) m) - 1 / (rho (1-theta))``, with the
    logarithmic forms ``log(C*)/rho + (gamma-rho)/rho^2`` and
    ``log(B)/rho + gamma/rho^2`` at ``theta = 1``.

    Raises
    ------
    BoundError
        If ``C*`` or ``B`` is not positive.
    """
    rho = model.rho
    a6.validate(rho)
    k = np.asarray(k_bar, dtype=float)
    if np.any(k <= 0):
        raise ValueError("k_bar must be > 0")
    th, g, dl = a6.theta, a6.gamma, a6.delta
    m = a6.tl_margin(rho)
    f_star = float(model.F(a6.k_star, a6.c_star))
    B = k - a6.k_star + (dl * a6.c_star + f_star) / g
    c_star = m / (th * dl) * B
    if np.any(c_star <= 0):
        raise BoundError(f"C* = {np.min(c_star):.6g} must be > 0")
    log_branch = abs(th - 1.0) < 1e-12
    if log_branch:
        v3 = np.log(c_star) / rho + (g - rho) / rho ** 2
    else:
        v3 = c_star ** (1 - th) * th / ((1 - th) * m) - 1.0 / (rho * (1 - th))
    out = a6.a * v3 + a6.cc / rho
    if a6.b != 0:
        if np.any(B <= 0):
            raise BoundError(f"V4 argument {np.min(B):.6g} must be > 0")
        if log_branch:
            v4 = np.log(B) / rho + g / rho ** 2
        else:
            v4 = B ** (1 - th) / ((1 - th) * m) - 1.0 / (rho * (1 - th))
        out = out + a6.b * v4
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# estimator facade
# ---------------------------------------------------------------------------

class ValueFunctionEstimator(TransformerMixin, BaseEstimator):
    """scikit-learn style wrapper around :func:`solve_hjb`.

    ``fit(X)`` takes the capital nodes (a 1-d array or one column) and
    solves the HJB equation on them. ``predict`` returns ``V`` and
    ``transform`` returns the columns ``[V, V', c*]``.

    Attributes
    ----------
    value_grid_ : ValueGrid
    certificate_ : CertificateReport
    n_iter_ : int
    """

    def __init__(self, model=None, max_iters=200, residual_tol=1e-8, relaxation=1.0,
                 scheme="upwind_implicit", dt=1e4, init="flat", a6=None, horizon=None):
        self.model = model
        self.max_iters = max_iters
        self.residual_tol = residual_tol
        self.relaxation = relaxation
        self.scheme = scheme
        self.dt = dt
        self.init = init
        self.a6 = a6
        self.horizon = horizon

    def fit(self, X, y=None):
        if self.model is None:
            raise ValueError("ValueFunctionEstimator needs a model")
        nodes = np.sort(check_capital(X, min_nodes=MIN_NODES))
        cfg = SolveConfig(self.max_iters, self.residual_tol, self.relaxation, self.scheme, self.dt)
        self.value_grid_, self.certificate_ = solve_hjb(
            self.model, nodes, cfg, init=self.init, a6=self.a6, horizon=self.horizon)
        self.n_iter_ = self.certificate_.iterations
        return self

    def predict(self, X):
        check_is_fitted(self, "value_grid_")
        return np.asarray(self.value_grid_.value(check_capital(X)), dtype=float)

    def transform(self, X):
        check_is_fitted(self, "value_grid_")
        k = check_capital(X)
        p = np.asarray(self.value_grid_.deriv(k), dtype=float)
        c = policy_map(self.model, k, p)[0]
        return np.column_stack([self.value_grid_.value(k), p, c])
