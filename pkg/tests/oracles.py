"""Independent oracles used to pin expected values in the test suite.

Everything here deliberately avoids the library's own numerical machinery:
expectations are adaptive trapezoid sums against the explicit normal density,
fixed points come from bisection, and partition functions / replica averages
come from naive full enumeration.  Keep it that way -- these oracles are the
other side of every dual-route check.
"""

import itertools
import math

import numpy as np


class GaussOracle:
    """Adaptive trapezoid quadrature for E[f(z)], z standard normal.

    Composite trapezoid on [lo, hi] starting at `step`, halving with one
    Richardson extrapolation per level until the extrapolated value settles.
    """

    def __init__(self, lo=-10.0, hi=10.0, step=1e-4, tol=1e-11, max_levels=4):
        self.lo = lo
        self.hi = hi
        self.tol = tol
        self._grids = []
        h = step
        for _ in range(max_levels):
            n = int(round((hi - lo) / h))
            z = np.linspace(lo, hi, n + 1)
            phi = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
            self._grids.append((z, phi, (hi - lo) / n))
            h /= 2.0

    def expect(self, f):
        prev_t = None
        prev_r = None
        for z, phi, h in self._grids:
            y = f(z) * phi
            t = h * (y.sum() - 0.5 * (y[0] + y[-1]))
            if prev_t is not None:
                r = t + (t - prev_t) / 3.0
                if prev_r is not None and abs(r - prev_r) < self.tol:
                    return r
                prev_r = r
            prev_t = t
        return prev_r if prev_r is not None else prev_t


def bisect_overlap_fixed_point(beta, h, gamma0, oracle, tol=1e-13):
    """Root of E[tanh^2(beta*sqrt(gamma0*r)*z + h)] - r = 0 on [0, 1]."""
    if h == 0.0:
        return 0.0

    def fp(r):
        a = beta * math.sqrt(max(gamma0 * r, 0.0))
        return oracle.expect(lambda z: np.tanh(a * z + h) ** 2)

    lo, hi = 0.0, 1.0
    f_lo = fp(lo) - lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = fp(mid) - mid
        if f_mid == 0.0 or (hi - lo) < tol:
            return mid
        if (f_lo > 0) == (f_mid > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def oracle_sk(beta, h, oracle):
    """Replica-symmetric free energy via bisection + trapezoid only."""
    s = bisect_overlap_fixed_point(beta, h, 1.0, oracle)
    a = beta * math.sqrt(s)
    tail = oracle.expect(lambda z: np.log(np.cosh(a * z + h)))
    return beta ** 2 * (1.0 - s) ** 2 / 4.0 + math.log(2.0) + tail


def oracle_clt_variance(beta, h, gamma0, oracle):
    """(tau_hat, tau) via the oracle pipeline."""
    r = bisect_overlap_fixed_point(beta, h, gamma0, oracle)
    a = beta * math.sqrt(gamma0 * r)
    m1 = oracle.expect(lambda z: np.log(np.cosh(a * z + h)))
    m2 = oracle.expect(lambda z: np.log(np.cosh(a * z + h)) ** 2)
    tau_hat = m2 - m1 * m1
    return tau_hat, tau_hat - beta ** 2 * gamma0 * r ** 2 / 2.0


def naive_site_coords(dim, radius):
    return list(itertools.product(range(-radius, radius + 1), repeat=dim))


def naive_pairs(n_sites):
    return [(a, b) for a in range(n_sites) for b in range(a + 1, n_sites)]


def naive_structure_sum(dim, radius, k):
    """Direct phase sum over the box, no closed form."""
    total = 0.0 + 0.0j
    for site in naive_site_coords(dim, radius):
        dot = sum(s * kk for s, kk in zip(site, k))
        # radius 0 leaves only the origin, where the phase exponent is 0
        ang = math.pi * dot / radius if radius > 0 else 0.0
        total += complex(math.cos(ang), math.sin(ang))
    return total / (2 * radius + 1) ** dim


def naive_log_partition(jmat, fields):
    """log sum over all configurations, direct summation, no Gray code."""
    n = len(fields)
    terms = []
    for bits in itertools.product((1, -1), repeat=n):
        s = np.array(bits, dtype=float)
        e = 0.5 * s @ jmat @ s + fields @ s
        terms.append(e)
    terms = np.array(terms)
    m = terms.max()
    return m + math.log(np.exp(terms - m).sum())


def naive_gibbs_correlations(jmat, fields):
    """(logZ, m, C): single-replica Gibbs first/second moments by enumeration."""
    n = len(fields)
    states = np.array(list(itertools.product((1, -1), repeat=n)), dtype=float)
    e = 0.5 * np.einsum("ij,ij->i", states @ jmat, states) + states @ fields
    emax = e.max()
    w = np.exp(e - emax)
    z = w.sum()
    m = states.T @ w / z
    c = (states.T * w) @ states / z
    return emax + math.log(z), m, c


def naive_two_replica_moments(jmat, fields, box_dim, box_radius, modes, r):
    """Two-replica overlap moments by double enumeration over replica pairs.

    Returns (nu_R, nu_R2, {mode: nu_|R_k|^2}, weighted_sum) with the k = 0
    entry of the weighted sum recentered by r.
    """
    n = len(fields)
    side_d = (2 * box_radius + 1) ** box_dim
    assert side_d == n
    states = np.array(list(itertools.product((1, -1), repeat=n)), dtype=float)
    e = 0.5 * np.einsum("ij,ij->i", states @ jmat, states) + states @ fields
    w = np.exp(e - e.max())
    w /= w.sum()

    coords = naive_site_coords(box_dim, box_radius)
    phases = {}
    for k, _ in modes:
        ang = np.array(
            [
                (math.pi * sum(c * kk for c, kk in zip(site, k)) / box_radius)
                if box_radius > 0
                else 0.0
                for site in coords
            ]
        )
        phases[k] = (np.cos(ang), np.sin(ang))

    nu_r = 0.0
    nu_r2 = 0.0
    mode_sq = {k: 0.0 for k, _ in modes}
    for i1, s1 in enumerate(states):
        for i2, s2 in enumerate(states):
            ww = w[i1] * w[i2]
            prod = s1 * s2
            overlap = prod.sum() / n
            nu_r += ww * overlap
            nu_r2 += ww * overlap ** 2
            for k, _ in modes:
                ck, sk = phases[k]
                re = (ck * prod).sum() / n
                im = (sk * prod).sum() / n
                mode_sq[k] += ww * (re * re + im * im)

    weighted = 0.0
    for k, gamma in modes:
        if all(kk == 0 for kk in k):
            weighted += gamma * (nu_r2 - 2.0 * r * nu_r + r * r)
        else:
            weighted += 2.0 * gamma * mode_sq[k]
    return nu_r, nu_r2, mode_sq, weighted


def euler_reversed_brownian(n_paths, t_end, dt, rng):
    """Euler scheme for X' = -X/(1-t) + dW, X(0) ~ N(0,1); values at t_end."""
    x = rng.standard_normal(n_paths)
    n_steps = int(round(t_end / dt))
    for i in range(n_steps):
        t = i * dt
        x = x - x / (1.0 - t) * dt + math.sqrt(dt) * rng.standard_normal(n_paths)
    return x
