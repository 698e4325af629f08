"""Disorder, Hamiltonian, exact enumeration and two-replica overlap moments.

Couplings are stored as raw standard normals indexed by the canonical pair
order of the box; the kernel weight and the beta / side^{d/2} scaling are
applied only when a coupling matrix is assembled.  One disorder sample
therefore serves every (beta, kernel), which is what the common-random-number
derivative check relies on.

Enumeration limits: log-partition sweeps run up to 24 sites (~16M Gray
steps); exact two-replica moments up to 13 sites.  The two-replica averages
need only one single-replica sweep because the product measure factorizes:
<s_i^1 s_i^2 s_j^1 s_j^2> = <s_i s_j>^2.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import backend
from .exceptions import LocskValidationError, TooLarge
from .kernel import KernelSpec, nonzero_components, qn_pair_matrix
from .lattice import LatticeBox
from .seeds import derive_seed, generator

LOGZ_SITE_LIMIT = 24
MOMENT_SITE_LIMIT = 13
FD_STEP = 1e-3


@dataclass(frozen=True)
class DisorderSample:
    """One realization of the Gaussian couplings, pair-indexed."""

    box: LatticeBox
    seed: int
    g: np.ndarray

    def __post_init__(self):
        if self.g.shape != (self.box.pair_count,):
            raise LocskValidationError(
                f"coupling array has length {self.g.shape}, expected {self.box.pair_count}"
            )


def sample_disorder(box: LatticeBox, seed: int) -> DisorderSample:
    """Deterministic standard normals for every unordered pair of the box."""
    g = generator(seed).standard_normal(box.pair_count)
    g.flags.writeable = False
    return DisorderSample(box=box, seed=int(seed), g=g)


def pair_matrix_from_flat(box: LatticeBox, flat: np.ndarray) -> np.ndarray:
    """Symmetric (n, n) matrix from a pair-indexed flat array, zero diagonal."""
    n = box.site_count
    m = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    m[iu] = flat
    m[(iu[1], iu[0])] = flat
    return m


def coupling_base(disorder: DisorderSample, spec: KernelSpec) -> np.ndarray:
    """q((i-j)/radius) * g_(i,j) / side^{d/2}, without the beta factor."""
    box = disorder.box
    if box.site_count == 1:
        return np.zeros((1, 1))
    qn = qn_pair_matrix(spec, box)
    gmat = pair_matrix_from_flat(box, disorder.g)
    return qn * gmat / math.sqrt(box.site_count)


def build_couplings_from_g(box: LatticeBox, spec: KernelSpec, g: np.ndarray, beta: float) -> np.ndarray:
    """Coupling matrix for an explicit pair-coupling array (shared by the
    static model and the interpolation path, so endpoints agree bit for bit)."""
    if box.site_count == 1:
        return np.zeros((1, 1))
    qn = qn_pair_matrix(spec, box)
    gmat = pair_matrix_from_flat(box, np.asarray(g, dtype=float))
    return beta * (qn * gmat / math.sqrt(box.site_count))


def validate_spins(sigma, site_count) -> np.ndarray:
    s = np.asarray(sigma)
    if s.shape != (site_count,):
        raise LocskValidationError(f"spin array has shape {s.shape}, expected ({site_count},)")
    if not np.all(np.abs(s) == 1):
        raise LocskValidationError("spins must be +/-1")
    return s.astype(np.float64)


def energy(sigma, disorder: DisorderSample, spec: KernelSpec, beta: float, h: float) -> float:
    """-H(sigma): coupling term plus field term."""
    s = validate_spins(sigma, disorder.box.site_count)
    jmat = beta * coupling_base(disorder, spec)
    return float(0.5 * s @ (jmat @ s) + h * s.sum())


def exact_log_partition(disorder: DisorderSample, spec: KernelSpec, beta: float, h: float,
                        *, site_limit: int = LOGZ_SITE_LIMIT):
    """(logZ, p_N) by Gray-code single-flip enumeration with streaming
    log-sum-exp."""
    box = disorder.box
    if box.site_count > site_limit:
        raise TooLarge(f"{box.site_count} sites exceeds the enumeration limit {site_limit}")
    jmat = beta * coupling_base(disorder, spec)
    fields = np.full(box.site_count, float(h))
    logz = backend.gray_logz(jmat, fields)
    return logz, logz / box.site_count


def mode_phases(box: LatticeBox, k) -> tuple:
    """(cos, sin) site vectors of exp(i pi i.k / radius); the origin-only
    radius-0 box has phase 1."""
    if box.radius == 0:
        return np.ones(1), np.zeros(1)
    ang = math.pi * (box.sites @ np.asarray(k, dtype=float)) / box.radius
    return np.cos(ang), np.sin(ang)


def overlap_observables(sigma1, sigma2, box: LatticeBox, modes):
    """(R^{1,2}, {k: R_k}) for two explicit configurations.

    Degenerate-configuration hook used by tests and the MCMC recorder; R_k is
    returned as a complex number, R_k = side^-d sum_i phase_i s_i^1 s_i^2.
    """
    s1 = validate_spins(sigma1, box.site_count)
    s2 = validate_spins(sigma2, box.site_count)
    prod = s1 * s2
    n = box.site_count
    overlap = float(prod.sum() / n)
    rk = {}
    for k, _ in modes:
        if nonzero_components(k) == 0:
            continue
        c, s = mode_phases(box, k)
        rk[k] = complex((c * prod).sum() / n, (s * prod).sum() / n)
    return overlap, rk


@dataclass(frozen=True)
class OverlapMoments:
    """Quenched-or-Gibbs averages of the two-replica overlaps.

    mode_sq[k] holds the second moment of the Fourier overlap |R_k|^2 for
    every canonical k != 0 of the kernel; the k = 0 entry of weighted_sum is
    recentered by r (that is the quantity whose decay the theory bounds),
    while nu_overlap_sq is the plain second moment.
    """

    modes: tuple
    gammas: tuple
    nu_overlap: float
    nu_overlap_sq: float
    nu_mode_sq: np.ndarray
    r: float
    nu_centered_sq: float
    weighted_sum: float
    se_overlap: Optional[float] = None
    se_overlap_sq: Optional[float] = None
    se_mode_sq: Optional[np.ndarray] = None
    se_weighted: Optional[float] = None


def moments_from_correlations(box: LatticeBox, spec: KernelSpec, corr: np.ndarray,
                              mag: np.ndarray, r: float) -> OverlapMoments:
    """Exact two-replica moments from the single-replica correlation matrix."""
    n = box.site_count
    d2 = corr * corr
    nu_r = float(mag @ mag) / n
    nu_r2 = float(d2.sum()) / n ** 2
    ks, gs, vals = [], [], []
    for k, gamma in spec.nonzero_modes():
        c, s = mode_phases(box, k)
        vals.append((c @ d2 @ c + s @ d2 @ s) / n ** 2)
        ks.append(k)
        gs.append(gamma)
    vals = np.array(vals)
    centered = nu_r2 - 2.0 * r * nu_r + r * r
    weighted = spec.gamma0 * centered
    if gs:
        weighted += float((2.0 * np.array(gs)) @ vals)
    return OverlapMoments(
        modes=tuple(ks), gammas=tuple(gs), nu_overlap=nu_r, nu_overlap_sq=nu_r2,
        nu_mode_sq=vals, r=float(r), nu_centered_sq=centered, weighted_sum=float(weighted),
    )


def overlap_moments_exact(disorder: DisorderSample, spec: KernelSpec, beta: float,
                          h: float, r: float, *, site_limit: int = MOMENT_SITE_LIMIT) -> OverlapMoments:
    """Exact Gibbs averages of the two-replica overlaps for one disorder draw."""
    box = disorder.box
    if box.site_count > site_limit:
        raise TooLarge(f"{box.site_count} sites exceeds the moment limit {site_limit}")
    jmat = beta * coupling_base(disorder, spec)
    fields = np.full(box.site_count, float(h))
    _, mag, corr = backend.correlation_sweep(jmat, fields)
    return moments_from_correlations(box, spec, corr, mag, r)


def pair_q2_sum(box: LatticeBox, spec: KernelSpec) -> float:
    """sum over unordered pairs of q^2((i-j)/radius), clamped like the
    Hamiltonian weight."""
    if box.site_count == 1:
        return 0.0
    qn = qn_pair_matrix(spec, box)
    return float((qn ** 2).sum()) / 2.0


def derivative_rhs(box: LatticeBox, spec: KernelSpec, beta: float,
                   moments: OverlapMoments, q2_pairs: float) -> float:
    """Right side of the quenched beta-derivative identity.

    beta * q2_pairs / n^2 - (beta/2) * sum_{k != 0} gamma_k nu(|R_k|^2)
    - (beta/2) gamma0 nu((R^{1,2})^2) + beta * Gamma / (2 n), with the k sum
    over all of Z^d (factor 2 per canonical mode) and the final term carrying
    the beta factor that the evenness of E[log Z] in beta forces.
    """
    n = box.site_count
    mode_term = float((2.0 * np.array(moments.gammas)) @ moments.nu_mode_sq) if moments.gammas else 0.0
    return (
        beta * q2_pairs / n ** 2
        - 0.5 * beta * mode_term
        - 0.5 * beta * spec.gamma0 * moments.nu_overlap_sq
        + 0.5 * beta * spec.gamma_sum / n
    )


def beta_derivative_residual(box: LatticeBox, spec: KernelSpec, beta: float, h: float,
                             r: float, samples: int, seed: int, *, delta: float = FD_STEP,
                             site_limit: int = MOMENT_SITE_LIMIT):
    """Monte Carlo check of d/dbeta E[p_N] against the overlap identity.

    The derivative is a central finite difference with common random numbers
    across beta +/- delta; the identity's overlap terms use the exact Gibbs
    moments of the same samples.  Each disorder draw is paired with its sign
    flip (antithetic in the couplings), which leaves the estimator unbiased
    but cancels the leading beta-independent noise of the finite difference,
    so the residual vanishes with beta like the identity itself.  Returns
    (mean residual, standard error).
    """
    if beta <= 0:
        raise LocskValidationError("the derivative check needs beta > 0")
    if samples < 1000:
        raise LocskValidationError("the derivative check needs at least 1000 samples")
    if box.site_count > site_limit:
        raise TooLarge(f"{box.site_count} sites exceeds the moment limit {site_limit}")
    n = box.site_count
    fields = np.full(n, float(h))
    q2p = pair_q2_sum(box, spec)
    residuals = np.empty(samples)
    for i in range(samples):
        disorder = sample_disorder(box, derive_seed(seed, "derivative-check", i))
        base = coupling_base(disorder, spec)
        acc = 0.0
        for sign in (1.0, -1.0):
            signed = sign * base
            logz_hi = backend.gray_logz((beta + delta) * signed, fields)
            logz_lo = backend.gray_logz((beta - delta) * signed, fields)
            fd = (logz_hi - logz_lo) / (2.0 * delta * n)
            _, mag, corr = backend.correlation_sweep(beta * signed, fields)
            moments = moments_from_correlations(box, spec, corr, mag, r)
            acc += fd - derivative_rhs(box, spec, beta, moments, q2p)
        residuals[i] = 0.5 * acc
    se = float(residuals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else float("nan")
    return float(residuals.mean()), se
