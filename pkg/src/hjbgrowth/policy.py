"""Hamiltonian maximisation: the consumption policy ``c*(p, k)``.

For a shadow price ``p > 0`` the Hamiltonian ``g(c) = p F(k, c) + u(c, k)``
is strictly concave in ``c`` under the model assumptions, so its maximiser is
the unique root of ``p dF/dc + du/dc``. The root is bracketed on
``(c_eps, c_cap]`` and found by bisection, vectorised over nodes.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ._validation import check_positive

DEFAULT_TOL = 1e-10
C_EPS_FRACTION = 1e-12
MAX_EXPANSIONS = 2
MAX_BISECTIONS = 400
MAX_SHRINKS = 60


class BracketFailure(RuntimeError):
    """The first-order condition kept its sign on the whole consumption bracket.

    Either ``c_cap`` is too small or marginal utility does not dominate as
    ``c -> 0`` / vanish as ``c -> inf`` (an Inada failure), in which case the
    Hamiltonian supremum may be infinite.
    """

    def __init__(self, k, p, c_hi):
        self.k, self.p, self.c_hi = k, p, c_hi
        super().__init__(
            f"first-order condition still positive at c={c_hi:.6g} (k={k:.6g}, p={p:.6g}); "
            "Hamiltonian may be unbounded (condition A4 fails) or c_cap is too small")


@dataclass(frozen=True)
class PolicyResult:
    c_star: float
    h_value: float
    foc_residual: float
    iterations: int
    interior: bool = True
    near_corner: bool = False


def hamiltonian(model, k, c, p):
    """``F(k, c) p + u(c, k)``; ``-inf`` wherever the utility is ``-inf``."""
    with np.errstate(invalid="ignore"):
        u = np.asarray(model.u(c, k), dtype=float)
        out = np.asarray(model.F(k, c), dtype=float) * p + u
        out = np.where(np.isneginf(u), -np.inf, out)
    return out if out.ndim else float(out)


def _foc(model, k, c, p):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return p * np.asarray(model.F_c(k, c), dtype=float) + np.asarray(model.u_c(c, k), dtype=float)


def _n_threads():
    try:
        return max(1, int(os.environ.get("HJB_GROWTH_THREADS", "1")))
    except ValueError:
        return 1


def _maximize_block(model, k, p, tol, c_cap):
    c_eps = C_EPS_FRACTION * c_cap
    lo = np.full_like(k, c_eps)
    hi = np.full_like(k, c_cap)
    g_lo = _foc(model, k, lo, p)
    corner = ~(g_lo > 0)
    g_hi = _foc(model, k, hi, p)
    if np.any(corner):
        # with u(0, k) = -inf the maximiser is interior, just below c_eps
        u0 = np.asarray(model.u(np.zeros_like(k), k), dtype=float)
        inner = corner & np.isneginf(u0)
        for _ in range(MAX_SHRINKS):
            if not np.any(inner):
                break
            hi = np.where(inner, lo, hi)
            g_hi = np.where(inner, g_lo, g_hi)
            lo = np.where(inner, lo * 1e-4, lo)
            g_lo = np.where(inner, _foc(model, k, lo, p), g_lo)
            found = inner & (g_lo > 0)
            corner &= ~found
            inner &= ~found
    for _ in range(MAX_EXPANSIONS):
        grow = (g_hi > 0) & ~corner
        if not np.any(grow):
            break
        hi = np.where(grow, 2.0 * hi, hi)
        g_hi = np.where(grow, _foc(model, k, hi, p), g_hi)
    failed = (g_hi > 0) & ~corner

    c = np.where(corner, lo, 0.5 * (lo + hi))
    foc = np.where(corner, g_lo, np.nan)
    iters = np.zeros(k.shape, dtype=int)
    active = ~corner & ~failed
    # the root sits exactly on the upper bracket
    at_hi = active & (g_hi == 0)
    c = np.where(at_hi, hi, c)
    foc = np.where(at_hi, 0.0, foc)
    active &= ~at_hi
    for _ in range(MAX_BISECTIONS):
        if not np.any(active):
            break
        mid = np.where(hi > 4.0 * lo, np.sqrt(lo * hi), 0.5 * (lo + hi))
        g = _foc(model, k, mid, p)
        iters = iters + active
        # stop on a small FOC residual once the bracket is also relatively tight
        tight = hi - lo <= 1e-13 * hi
        done = active & (((np.abs(g) <= tol) & tight) | (g == 0) | (hi - lo <= 4.0 * np.spacing(hi)))
        c = np.where(active, mid, c)
        foc = np.where(active, g, foc)
        lo = np.where(active & (g > 0), mid, lo)
        hi = np.where(active & (g < 0), mid, hi)
        active &= ~done

    # corner solutions: take c = 0 itself whenever the utility is finite there
    if np.any(corner):
        u0 = np.asarray(model.u(np.zeros_like(k), k), dtype=float)
        zero_ok = corner & np.isfinite(u0)
        c = np.where(zero_ok, 0.0, c)
        foc = np.where(zero_ok, _foc(model, k, np.zeros_like(k), p), foc)
    h = np.asarray(hamiltonian(model, k, c, p), dtype=float)
    return c, h, np.abs(foc), iters, ~corner, failed


def policy_map(model, k, p, tol=DEFAULT_TOL, c_cap=None):
    """Vectorised Hamiltonian maximiser.

    Returns ``(c_star, h_value, foc_residual, iterations, interior, failed)``
    as arrays broadcast from ``k`` and ``p``. Entries flagged ``failed`` hit
    a :class:`BracketFailure`; the caller decides what that means.
    """
    k, p = np.broadcast_arrays(np.asarray(k, dtype=float), np.asarray(p, dtype=float))
    shape = k.shape
    k, p = k.ravel().copy(), p.ravel().copy()
    c_cap = model.c_cap if c_cap is None else float(c_cap)
    threads = _n_threads()
    if threads > 1 and k.size >= 64:
        chunks = np.array_split(np.arange(k.size), threads)
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda ix: _maximize_block(model, k[ix], p[ix], tol, c_cap), chunks))
        out = [np.concatenate([part[i] for part in parts]) for i in range(6)]
    else:
        out = _maximize_block(model, k, p, tol, c_cap)
    return tuple(np.reshape(a, shape) for a in out)


def policy_scalar(model, k, p, c_cap=None):
    """Fast scalar ``c*(p, k)`` for path integration.

    Uses Brent's method on the first-order condition when it changes sign
    on ``[c_eps, c_cap]`` and defers to :func:`policy_map` otherwise (corners,
    bracket expansion, failures). Returns ``nan`` on bracket failure.
    """
    cap = model.c_cap if c_cap is None else float(c_cap)
    lo, hi = C_EPS_FRACTION * cap, cap

    def g(c):
        return float(_foc(model, k, c, p))

    g_lo, g_hi = g(lo), g(hi)
    if g_lo > 0 > g_hi:
        return brentq(g, lo, hi, xtol=1e-300, rtol=1e-14, maxiter=200)
    c, _, _, _, _, failed = policy_map(model, np.array([k]), np.array([p]), c_cap=cap)
    return float("nan") if failed[0] else float(c[0])


def maximize_hamiltonian(model, k, p, tol=DEFAULT_TOL, c_cap=None):
    """Maximise ``F(k, c) p + u(c, k)`` over ``c >= 0``.

    Raises
    ------
    BracketFailure
        If the first-order condition is still positive after doubling the
        upper bracket twice.
    """
    k = check_positive(k, "k")
    p = check_positive(p, "p")
    tol = check_positive(tol, "tol")
    cap = model.c_cap if c_cap is None else float(c_cap)
    c, h, foc, iters, interior, failed = (
        a.item() for a in policy_map(model, np.array([k]), np.array([p]), tol, cap))
    if failed:
        raise BracketFailure(k, p, cap * 2 ** MAX_EXPANSIONS)
    near = bool(interior) and c < 10.0 * C_EPS_FRACTION * cap
    return PolicyResult(float(c), float(h), float(foc), int(iters), bool(interior), near)


def policy_independence_check(model, p, k_samples, tol=1e-8):
    """True iff ``c*(p, k)`` varies by at most ``tol`` across ``k_samples``."""
    ks = np.unique(np.asarray(k_samples, dtype=float))
    if ks.size < 3:
        raise ValueError("policy_independence_check needs at least 3 distinct k samples")
    c = [maximize_hamiltonian(model, float(k), p).c_star for k in ks]
    return bool(np.max(c) - np.min(c) <= tol)
