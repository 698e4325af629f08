# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled core: Gray-code enumeration and heat-bath sweeps.

Contracts match locsk._pure; locsk.backend picks whichever is available.
"""

from libc.math cimport exp, log

import numpy as np


def gray_logz(double[:, ::1] jmat, double[::1] fields):
    """log sum_sigma exp(0.5 s'Js + f's), streaming log-sum-exp in Gray order."""
    cdef Py_ssize_t n = fields.shape[0]
    if n > 40:
        raise ValueError("gray enumeration limited to 40 sites")
    cdef double[::1] local = np.empty(n)
    cdef signed char[::1] sig = np.ones(n, dtype=np.int8)
    cdef Py_ssize_t a, f
    cdef double acc_e = 0.0, d

    for a in range(n):
        d = fields[a]
        for f in range(n):
            d += jmat[a, f]
        local[a] = d
    for a in range(n):
        acc_e += 0.5 * (local[a] + fields[a])

    cdef unsigned long long t, total = (<unsigned long long> 1 << n) - 1
    cdef unsigned long long g
    cdef double m = acc_e, s = 1.0
    for t in range(1, total + 1):
        g = t
        f = 0
        while not (g & 1):
            g >>= 1
            f += 1
        d = -2.0 * sig[f]
        acc_e += d * local[f]
        sig[f] = -sig[f]
        for a in range(n):
            local[a] += d * jmat[a, f]
        if acc_e > m:
            s = s * exp(m - acc_e) + 1.0
            m = acc_e
        else:
            s += exp(acc_e - m)
    return m + log(s)


def correlation_sweep(double[:, ::1] jmat, double[::1] fields,
                      double[::1] m_out, double[:, ::1] c_out):
    """Exact Gibbs <s_a> into m_out and <s_a s_b> into c_out; returns logZ.

    Two Gray passes: the first finds the peak energy, the second accumulates
    exp(E - Emax)-weighted spin products.
    """
    cdef Py_ssize_t n = fields.shape[0]
    if n > 20:
        raise ValueError("correlation sweep limited to 20 sites")
    cdef double[::1] local = np.empty(n)
    cdef signed char[::1] sig = np.ones(n, dtype=np.int8)
    cdef Py_ssize_t a, b, f
    cdef double acc_e = 0.0, d, emax
    cdef unsigned long long t, g, total = (<unsigned long long> 1 << n) - 1

    for a in range(n):
        d = fields[a]
        for f in range(n):
            d += jmat[a, f]
        local[a] = d
    for a in range(n):
        acc_e += 0.5 * (local[a] + fields[a])

    emax = acc_e
    for t in range(1, total + 1):
        g = t
        f = 0
        while not (g & 1):
            g >>= 1
            f += 1
        d = -2.0 * sig[f]
        acc_e += d * local[f]
        sig[f] = -sig[f]
        for a in range(n):
            local[a] += d * jmat[a, f]
        if acc_e > emax:
            emax = acc_e

    # second pass: reset and accumulate
    for a in range(n):
        sig[a] = 1
        d = fields[a]
        for f in range(n):
            d += jmat[a, f]
        local[a] = d
    acc_e = 0.0
    for a in range(n):
        acc_e += 0.5 * (local[a] + fields[a])
    for a in range(n):
        m_out[a] = 0.0
        for b in range(n):
            c_out[a, b] = 0.0

    cdef double zsum = 0.0, w, wa
    w = exp(acc_e - emax)
    zsum += w
    for a in range(n):
        m_out[a] += w * sig[a]
        wa = w * sig[a]
        for b in range(a + 1, n):
            c_out[a, b] += wa * sig[b]
    for t in range(1, total + 1):
        g = t
        f = 0
        while not (g & 1):
            g >>= 1
            f += 1
        d = -2.0 * sig[f]
        acc_e += d * local[f]
        sig[f] = -sig[f]
        for a in range(n):
            local[a] += d * jmat[a, f]
        w = exp(acc_e - emax)
        zsum += w
        for a in range(n):
            m_out[a] += w * sig[a]
            wa = w * sig[a]
            for b in range(a + 1, n):
                c_out[a, b] += wa * sig[b]

    for a in range(n):
        m_out[a] /= zsum
        c_out[a, a] = 1.0
        for b in range(a + 1, n):
            c_out[a, b] /= zsum
            c_out[b, a] = c_out[a, b]
    return emax + log(zsum)


def heat_bath_chunk(double[:, ::1] jmat, double[::1] fields,
                    signed char[::1] sigma, double[::1] local,
                    double[:, ::1] uniforms,
                    signed char[:, ::1] snaps, Py_ssize_t first_record,
                    Py_ssize_t every, double energy, bint do_record):
    """Heat-bath sweeps in fixed site order; see locsk._pure.heat_bath_chunk."""
    cdef Py_ssize_t nsweeps = uniforms.shape[0]
    cdef Py_ssize_t n = uniforms.shape[1]
    cdef Py_ssize_t s, i, j, row
    cdef double li, p, e2, d
    cdef signed char new, old

    for s in range(nsweeps):
        for i in range(n):
            li = local[i]
            if li >= 0.0:
                p = 1.0 / (1.0 + exp(-2.0 * li))
            else:
                e2 = exp(2.0 * li)
                p = e2 / (1.0 + e2)
            new = 1 if uniforms[s, i] < p else -1
            old = sigma[i]
            if new != old:
                d = <double> (new - old)
                energy += d * li
                for j in range(n):
                    local[j] += d * jmat[j, i]
                sigma[i] = new
        if do_record and s >= first_record and (s - first_record) % every == 0:
            row = (s - first_record) // every
            for j in range(n):
                snaps[row, j] = sigma[j]
    return energy
