"""Two-replica heat-bath sampler on a shared disorder realization.

Heat-bath (Glauber) updates in fixed sequential site order: rejection-free at
high temperature and easy to test for stationarity.  Each chain owns an
independent PCG64 stream derived from the run seed via SeedSequence spawn
keys; all uniforms are drawn from that stream in sweep-major order, so a run
is reproducible bit for bit regardless of backend or chunking.

Error bars come from batch means over 32 batches, which is plenty for the
short autocorrelation times of the high-temperature regime this targets.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .exceptions import InvalidSchedule, LocskNumericalError
from .kernel import KernelSpec
from .model import DisorderSample, OverlapMoments, coupling_base, mode_phases

DRIFT_CHECK_SWEEPS = 1000
DRIFT_TOL = 1e-8
BATCHES = 32


@dataclass
class ChainState:
    """Spins plus incrementally maintained local fields and energy."""

    sigma: np.ndarray      # int8, +/-1
    local_field: np.ndarray
    energy: float

    def drift(self, jmat, fields) -> float:
        ref = jmat @ self.sigma.astype(float) + fields
        return float(np.abs(ref - self.local_field).max())


def init_chain(jmat, fields, rng) -> ChainState:
    n = fields.shape[0]
    sigma = (2 * rng.integers(0, 2, size=n) - 1).astype(np.int8)
    s = sigma.astype(float)
    local = jmat @ s + fields
    energy = 0.5 * float(s @ local + s @ fields)
    return ChainState(sigma=sigma, local_field=local, energy=energy)


def heat_bath_sweep(state: ChainState, disorder: DisorderSample, spec: KernelSpec,
                    beta: float, h: float, rng) -> ChainState:
    """One full sweep of single-site heat-bath updates, in place."""
    jmat = beta * coupling_base(disorder, spec)
    fields = np.full(disorder.box.site_count, float(h))
    uniforms = rng.random((1, fields.shape[0]))
    state.energy = backend.heat_bath_chunk(
        jmat, fields, state.sigma, state.local_field, uniforms, None, 0, 1, state.energy
    )
    return state


def _run_chain(jmat, fields, rng, sweeps, burn_in, thin, chunk=DRIFT_CHECK_SWEEPS):
    """Run one chain, returning snapshots of the spins every `thin`-th sweep
    after burn-in.  Local fields are drift-checked against a fresh
    recomputation at every chunk boundary."""
    n = fields.shape[0]
    state = init_chain(jmat, fields, rng)
    n_rec = (sweeps - burn_in + thin - 1) // thin
    snaps = np.empty((n_rec, n), dtype=np.int8)
    done = 0
    while done < sweeps:
        size = min(chunk, sweeps - done)
        uniforms = rng.random((size, n))
        # first recorded sweep >= burn_in, on the global thin cadence
        offset = burn_in - done
        if offset < 0:
            offset = offset % thin
        if offset < size:
            first = offset
            rec_rows = snaps[(done + first - burn_in) // thin:]
        else:
            first = size  # nothing recorded this chunk
            rec_rows = snaps[:0]
        state.energy = backend.heat_bath_chunk(
            jmat, fields, state.sigma, state.local_field, uniforms,
            rec_rows if rec_rows.size else None, first, thin, state.energy,
        )
        done += size
        if state.drift(jmat, fields) > DRIFT_TOL:
            raise LocskNumericalError("local-field bookkeeping drifted beyond 1e-8")
    return snaps


def batch_means_se(series: np.ndarray, batches: int = BATCHES) -> float:
    """Autocorrelation-aware standard error of the mean by batch means."""
    m = len(series)
    nb = min(batches, m // 2)
    if nb < 2:
        return float("nan")
    width = m // nb
    trimmed = series[: nb * width].reshape(nb, width)
    bm = trimmed.mean(axis=1)
    return float(bm.std(ddof=1) / math.sqrt(nb))


def run_replica_chain(disorder: DisorderSample, spec: KernelSpec, beta: float, h: float,
                      r: float, sweeps: int, burn_in: int, thin: int, seed: int,
                      *, batches: int = BATCHES) -> OverlapMoments:
    """Overlap-moment estimates from two independent chains on one disorder.

    Chain c uses the stream SeedSequence(entropy=seed, spawn_key=(c,)).
    Records R^{1,2} and |R_k|^2 every `thin`-th sweep after burn-in and
    returns means with batch-means standard errors.
    """
    if burn_in < 0 or burn_in >= sweeps:
        raise InvalidSchedule(f"need 0 <= burn_in < sweeps, got {burn_in} / {sweeps}")
    if thin < 1:
        raise InvalidSchedule(f"thin must be >= 1, got {thin}")
    box = disorder.box
    n = box.site_count
    jmat = beta * coupling_base(disorder, spec)
    fields = np.full(n, float(h))

    snaps = []
    for c in range(2):
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(entropy=int(seed), spawn_key=(c,)))
        )
        snaps.append(_run_chain(jmat, fields, rng, sweeps, burn_in, thin))

    prod = (snaps[0].astype(np.float64)) * snaps[1]
    overlap = prod.sum(axis=1) / n

    ks, gs = [], []
    series = [overlap, overlap ** 2]
    for k, gamma in spec.nonzero_modes():
        c, s = mode_phases(box, k)
        re = prod @ c / n
        im = prod @ s / n
        series.append(re * re + im * im)
        ks.append(k)
        gs.append(gamma)

    weighted = spec.gamma0 * (series[1] - 2.0 * r * series[0] + r * r)
    for gamma, mode_series in zip(gs, series[2:]):
        weighted = weighted + 2.0 * gamma * mode_series

    mode_means = np.array([s.mean() for s in series[2:]])
    mode_ses = np.array([batch_means_se(s, batches) for s in series[2:]])
    nu_r = float(series[0].mean())
    nu_r2 = float(series[1].mean())
    return OverlapMoments(
        modes=tuple(ks), gammas=tuple(gs),
        nu_overlap=nu_r, nu_overlap_sq=nu_r2, nu_mode_sq=mode_means, r=float(r),
        nu_centered_sq=nu_r2 - 2.0 * r * nu_r + r * r,
        weighted_sum=float(weighted.mean()),
        se_overlap=batch_means_se(series[0], batches),
        se_overlap_sq=batch_means_se(series[1], batches),
        se_mode_sq=mode_ses,
        se_weighted=batch_means_se(weighted, batches),
    )
