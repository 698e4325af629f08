"""Pure numpy fallback for the hot enumeration and sampling kernels.

Same contracts as the compiled core in _corex.pyx.  The enumeration kernels
vectorize the low-order spins in blocks and Gray-code the remaining high
spins, so they stay usable (if slower) without the extension.  The heat-bath
sweep is a plain per-site loop consuming the same uniform stream as the
compiled kernel, which keeps trajectories bit-identical across backends.
"""

import math

import numpy as np

_BLOCK_BITS = 14


def _low_patterns(b):
    bits = (np.arange(1 << b, dtype=np.int64)[:, None] >> np.arange(b)) & 1
    return 1.0 - 2.0 * bits  # (2^b, b) of +/-1


def _ctz(t):
    return (t & -t).bit_length() - 1


def gray_logz(jmat, fields):
    """log sum_sigma exp(0.5 s'Js + f's) by blocked Gray enumeration."""
    n = fields.shape[0]
    b = min(n, _BLOCK_BITS)
    s_low = _low_patterns(b)
    j_ll = jmat[:b, :b]
    e_low = 0.5 * np.einsum("ij,ij->i", s_low @ j_ll, s_low) + s_low @ fields[:b]

    if b == n:
        m = e_low.max()
        return float(m + math.log(np.exp(e_low - m).sum()))

    n_hi = n - b
    j_hh = jmat[b:, b:]
    j_lh = jmat[:b, b:]
    f_hi = fields[b:]
    sig = np.ones(n_hi)
    local = j_hh @ sig + f_hi
    c = 0.5 * sig @ (j_hh @ sig) + f_hi @ sig
    v = j_lh @ sig

    m = -math.inf
    acc = 0.0
    for t in range(1 << n_hi):
        if t:
            u = _ctz(t)
            d = -2.0 * sig[u]
            c += d * local[u]
            sig[u] = -sig[u]
            local += d * j_hh[:, u]
            v += d * j_lh[:, u]
        e_block = e_low + s_low @ v + c
        bm = e_block.max()
        if bm > m:
            acc *= math.exp(m - bm)
            m = bm
        acc += np.exp(e_block - m).sum()
    return float(m + math.log(acc))


def correlation_sweep(jmat, fields):
    """(logZ, m, C): exact single-replica Gibbs <s_a> and <s_a s_b>.

    Single-shot vectorization; intended for the two-replica moment limit
    (site_count <= 13), where the full configuration matrix is small.
    """
    n = fields.shape[0]
    if n > 16:
        raise ValueError("correlation sweep limited to 16 sites")
    states = _low_patterns(n)
    e = 0.5 * np.einsum("ij,ij->i", states @ jmat, states) + states @ fields
    emax = e.max()
    w = np.exp(e - emax)
    z = w.sum()
    m = states.T @ w / z
    c = (states.T * w) @ states / z
    return float(emax + math.log(z)), m, c


def heat_bath_chunk(jmat, fields, sigma, local, uniforms, snaps, first_record, every, energy):
    """Sequential heat-bath sweeps in fixed site order.

    Site i is resampled to +1 with probability sigmoid(2 local[i]), where
    local[i] = sum_j J[i,j] sigma_j + fields[i] excludes the spin's own
    contribution (J has zero diagonal).  Consumes uniforms[s, i] row by row;
    snapshots sigma into snaps every `every`-th sweep starting at
    `first_record` (pass snaps=None to skip).  Returns the updated energy.
    """
    nsweeps, n = uniforms.shape
    for s in range(nsweeps):
        row = uniforms[s]
        for i in range(n):
            li = local[i]
            if li >= 0.0:
                p = 1.0 / (1.0 + math.exp(-2.0 * li))
            else:
                e2 = math.exp(2.0 * li)
                p = e2 / (1.0 + e2)
            new = 1 if row[i] < p else -1
            old = sigma[i]
            if new != old:
                d = float(new - old)
                energy += d * li
                local += d * jmat[:, i]
                sigma[i] = new
        if snaps is not None and s >= first_record and (s - first_record) % every == 0:
            snaps[(s - first_record) // every] = sigma
    return energy
