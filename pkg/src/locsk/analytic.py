"""Replica-symmetric analytic layer.

All Gaussian expectations run through Gauss-Hermite quadrature (default 61
nodes; the integrands are entire with sub-exponential growth, so convergence
is spectral).  The self-consistent overlap r solves

    r = E[tanh^2(beta * sqrt(gamma0 * r) * z + h)],  z standard normal,

which has a unique root in [0, 1] for h > 0; at h = 0 the conventional
analytic continuation r = 0 is returned with a RuntimeWarning.  The same
equation at gamma0 = 1 and inverse temperature sqrt(gamma0)*beta defines s,
so r(beta, gamma0) = s(sqrt(gamma0)*beta) numerically.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite import hermgauss

from .exceptions import LocskValidationError, NoConvergence

DEFAULT_NODES = 61
DEFAULT_TOL = 1e-12
MAX_FIXED_POINT_ITER = 10_000

_node_cache = {}


def _gh(nodes):
    if nodes not in _node_cache:
        x, w = hermgauss(nodes)
        _node_cache[nodes] = (math.sqrt(2.0) * x, w / math.sqrt(math.pi))
    return _node_cache[nodes]


def expect_gauss(f, nodes=DEFAULT_NODES) -> float:
    """E[f(z)] for standard normal z; f must accept an ndarray of nodes."""
    if nodes < 21:
        raise LocskValidationError(f"need at least 21 quadrature nodes, got {nodes}")
    z, w = _gh(nodes)
    return float(w @ np.asarray(f(z), dtype=float))


def log_cosh(t):
    """Overflow-safe log(cosh(t))."""
    t = np.abs(t)
    return t + np.log1p(np.exp(-2.0 * t)) - math.log(2.0)


def _check_params(beta, h, gamma0):
    if beta < 0 or h < 0 or gamma0 < 0:
        raise LocskValidationError(
            f"beta, h, gamma0 must be >= 0 (got {beta}, {h}, {gamma0})"
        )


def solve_r(beta, h, gamma0, tol=DEFAULT_TOL, *, nodes=DEFAULT_NODES) -> float:
    """Self-consistent overlap: fixed point of E[tanh^2(beta sqrt(gamma0 r) z + h)].

    Plain fixed-point iteration from r0 = tanh(h)^2, with a bisection fallback
    should it ever stall; the returned value has fixed-point residual <= tol.
    """
    _check_params(beta, h, gamma0)
    if tol <= 0:
        raise LocskValidationError("tol must be positive")
    if h == 0.0:
        warnings.warn(
            "h = 0: returning the conventional continuation r = 0",
            RuntimeWarning,
            stacklevel=2,
        )
        return 0.0

    def fmap(r):
        a = beta * math.sqrt(max(gamma0 * r, 0.0))
        return expect_gauss(lambda z: np.tanh(a * z + h) ** 2, nodes)

    r = math.tanh(h) ** 2
    for _ in range(MAX_FIXED_POINT_ITER):
        rn = fmap(r)
        if abs(rn - r) <= 0.25 * tol:
            if abs(fmap(rn) - rn) <= tol:
                return min(max(rn, 0.0), 1.0)
            break
        r = rn
    # non-contractive regime: bisect the residual on [0, 1]
    lo, hi = 0.0, 1.0
    f_lo = fmap(lo) - lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = fmap(mid) - mid
        if abs(f_mid) <= tol:
            return mid
        if (f_lo > 0) == (f_mid > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    raise NoConvergence(
        f"overlap fixed point did not converge for beta={beta}, h={h}, gamma0={gamma0}"
    )


def sk_value(beta, h, *, nodes=DEFAULT_NODES, tol=DEFAULT_TOL) -> float:
    """High-temperature replica-symmetric free energy of the mean-field model."""
    _check_params(beta, h, 1.0)
    s = solve_r(beta, h, 1.0, tol, nodes=nodes) if h > 0 else 0.0
    a = beta * math.sqrt(s)
    tail = expect_gauss(lambda z: log_cosh(a * z + h), nodes)
    return beta ** 2 * (1.0 - s) ** 2 / 4.0 + math.log(2.0) + tail


def clt_variance(beta, h, gamma0, *, nodes=DEFAULT_NODES, tol=DEFAULT_TOL):
    """(tau_hat, tau): variance of log cosh(beta sqrt(gamma0 r) z + h) and the
    centered-limit variance tau = tau_hat - beta^2 gamma0 r^2 / 2."""
    _check_params(beta, h, gamma0)
    if beta == 0.0 or h == 0.0:
        return 0.0, 0.0
    r = solve_r(beta, h, gamma0, tol, nodes=nodes)
    a = beta * math.sqrt(gamma0 * r)
    if a == 0.0:
        return 0.0, 0.0
    m1 = expect_gauss(lambda z: log_cosh(a * z + h), nodes)
    m2 = expect_gauss(lambda z: log_cosh(a * z + h) ** 2, nodes)
    tau_hat = max(m2 - m1 * m1, 0.0)
    return tau_hat, tau_hat - beta ** 2 * gamma0 * r ** 2 / 2.0


def interpolated_free_energy(beta, h, gamma0, t, *, nodes=DEFAULT_NODES, tol=DEFAULT_TOL) -> float:
    """Free energy along the interpolation path; t = 1 gives p(beta, h)."""
    _check_params(beta, h, gamma0)
    if not 0.0 <= t <= 1.0:
        raise LocskValidationError(f"t must lie in [0, 1], got {t}")
    r = solve_r(beta, h, gamma0, tol, nodes=nodes) if h > 0 else 0.0
    a = beta * math.sqrt(gamma0 * r)
    tail = expect_gauss(lambda z: log_cosh(a * z + h), nodes)
    return beta ** 2 * gamma0 * t * (1.0 - r) ** 2 / 4.0 + math.log(2.0) + tail


@dataclass(frozen=True)
class AnalyticSolution:
    """Solved replica-symmetric quantities at one parameter point."""

    beta: float
    h: float
    gamma0: float
    r: float
    s: float
    sk_value: float
    p_value: float
    tau_hat: float
    tau: float
    notes: tuple = ()

    @classmethod
    def solve(cls, beta, h, gamma0, *, nodes=DEFAULT_NODES, tol=DEFAULT_TOL):
        _check_params(beta, h, gamma0)
        notes = []
        if h == 0.0:
            notes.append("h=0: overlap set to 0 by convention")
            r = s = 0.0
        else:
            r = solve_r(beta, h, gamma0, tol, nodes=nodes)
            s = solve_r(math.sqrt(gamma0) * beta, h, 1.0, tol, nodes=nodes)
        sk = sk_value(math.sqrt(gamma0) * beta, h, nodes=nodes, tol=tol)
        p = interpolated_free_energy(beta, h, gamma0, 1.0, nodes=nodes, tol=tol)
        tau_hat, tau = clt_variance(beta, h, gamma0, nodes=nodes, tol=tol)
        if tau < 0:
            notes.append("tau < 0 at these parameters")
        return cls(
            beta=beta, h=h, gamma0=gamma0, r=r, s=s, sk_value=sk, p_value=p,
            tau_hat=tau_hat, tau=tau, notes=tuple(notes),
        )
