"""Stochastic interpolation path between independent site fields and the
full coupled model.

Per pair a Brownian motion B(t) with B(1) equal to the disorder coupling;
per site a reversed-time process X(t) started at a standard normal and
pinned to 0 at t = 1, with marginal variance 1 - t.  Both are sampled by
exact Gaussian transitions (no Euler bias), so the time grid is purely a
reporting choice.

Seed mapping: the stream of `seed` first draws the pair endpoints (exactly
the draws of model.sample_disorder with the same seed), then the site
normals eta, then per grid interval the pair bridge noises followed by the
site transition noises.  Drawing the endpoint first and bridging the
interior reproduces the independent-increment law of B while making the
t = 1 state bit-identical to the direct disorder sample.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .exceptions import InvalidGrid, LocskValidationError, TooLarge
from .kernel import KernelSpec
from .lattice import LatticeBox
from .model import LOGZ_SITE_LIMIT, build_couplings_from_g
from .seeds import generator


@dataclass(frozen=True)
class PathState:
    """Sampled pair and site processes on a fixed time grid."""

    box: LatticeBox
    t_grid: np.ndarray     # (nt,), 0 = t_0 < ... < t_last = 1
    b: np.ndarray          # (nt, pair_count), b[0] = 0, b[-1] = couplings
    x: np.ndarray          # (nt, site_count), x[0] = eta, x[-1] = 0
    eta: np.ndarray        # (site_count,)


def validate_grid(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or len(t) < 2:
        raise InvalidGrid("grid needs at least the two endpoints")
    if t[0] != 0.0 or t[-1] != 1.0:
        raise InvalidGrid(f"grid must run from 0 to 1, got [{t[0]}, {t[-1]}]")
    if not np.all(np.diff(t) > 0):
        raise InvalidGrid("grid must be strictly increasing")
    return t


def default_grid(points: int = 11) -> np.ndarray:
    return np.linspace(0.0, 1.0, points)


def sample_path(box: LatticeBox, t_grid, seed: int) -> PathState:
    """Exact-transition sample of all pair and site processes."""
    t = validate_grid(t_grid)
    nt = len(t)
    rng = generator(seed)
    g = rng.standard_normal(box.pair_count)
    eta = rng.standard_normal(box.site_count)

    b = np.zeros((nt, box.pair_count))
    x = np.zeros((nt, box.site_count))
    x[0] = eta
    for l in range(1, nt):
        t0, t1 = t[l - 1], t[l]
        dt = t1 - t0
        if t1 == 1.0:
            b[l] = g
        else:
            mean = b[l - 1] + dt / (1.0 - t0) * (g - b[l - 1])
            std = math.sqrt(dt * (1.0 - t1) / (1.0 - t0))
            b[l] = mean + std * rng.standard_normal(box.pair_count)
        if t1 == 1.0:
            x[l] = 0.0
        else:
            shrink = (1.0 - t1) / (1.0 - t0)
            std = math.sqrt((1.0 - t1) * dt / (1.0 - t0))
            x[l] = x[l - 1] * shrink + std * rng.standard_normal(box.site_count)
    return PathState(box=box, t_grid=t, b=b, x=x, eta=eta)


def log_partition_at(path: PathState, t_index: int, spec: KernelSpec, beta: float,
                     h: float, r: float, *, site_limit: int = LOGZ_SITE_LIMIT) -> float:
    """log Z of the interpolated Hamiltonian at grid time t_index.

    Couplings scale with B(t); the external field at site i is
    h + beta * sqrt(gamma0 * r) * X_i(t).  Runs through the same enumeration
    path as the static model, so t = 1 reproduces it exactly.
    """
    box = path.box
    if box.site_count > site_limit:
        raise TooLarge(f"{box.site_count} sites exceeds the enumeration limit {site_limit}")
    jmat = build_couplings_from_g(box, spec, path.b[t_index], beta)
    fields = h + beta * math.sqrt(spec.gamma0 * r) * path.x[t_index]
    return backend.gray_logz(jmat, fields)


def initial_closed_form(eta, beta: float, h: float, r_hat: float) -> float:
    """Closed form of log Z at t = 0: n log 2 + sum_i log cosh(beta sqrt(r_hat) eta_i + h)."""
    eta = np.asarray(eta, dtype=float)
    if r_hat < 0:
        raise LocskValidationError(f"r_hat must be >= 0, got {r_hat}")
    t = beta * math.sqrt(r_hat) * eta + h
    a = np.abs(t)
    log_cosh = a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)
    return float(len(eta) * math.log(2.0) + log_cosh.sum())
