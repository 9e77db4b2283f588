# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# distutils: language = c++
"""Compiled kernels. Must stay in arithmetic lockstep with ``_pykernels.py``."""

import numpy as np

from libc.math cimport exp, sqrt, isfinite, INFINITY
from libcpp.vector cimport vector
from libc.stdint cimport int64_t, int8_t, uint64_t

cdef enum:
    RULE_GIBBS = 0
    RULE_METROPOLIS = 1

cdef double EXP_CUTOFF = 700.0


def anneal_sweeps(const int64_t[::1] indptr, const int64_t[::1] indices,
                  const double[::1] data, const double[::1] h,
                  int8_t[::1] spins, const double[::1] temps, int rule,
                  const int64_t[:, ::1] order, const double[:, ::1] u_acc,
                  double p_in, const double[:, ::1] u_in,
                  double p_out, const double[:, ::1] u_out,
                  double energy, double best_energy, int8_t[::1] best_spins,
                  double[::1] trace, int64_t[::1] accepted,
                  double[::1] max_uphill, int8_t[:, ::1] record):
    cdef Py_ssize_t n = spins.shape[0]
    cdef Py_ssize_t nsweeps = temps.shape[0]
    cdef bint use_order = order.shape[0] > 0
    cdef bint use_in = p_in > 0.0
    cdef bint use_out = p_out > 0.0
    cdef bint do_record = record.shape[0] > 0
    cdef Py_ssize_t sw, k, i, p, q
    cdef double t, field, noisy, f, v, x, pup, d, uphill
    cdef int8_t old, new
    cdef int64_t n_acc
    cdef Py_ssize_t status = -1
    with nogil:
        for sw in range(nsweeps):
            t = temps[sw]
            n_acc = 0
            uphill = -INFINITY
            for k in range(n):
                if use_order:
                    i = order[sw, k]
                else:
                    i = k
                field = h[i]
                noisy = h[i]
                for p in range(indptr[i], indptr[i + 1]):
                    v = data[p] * spins[indices[p]]
                    field += v
                    if use_in:
                        if u_in[sw, p] < p_in:
                            noisy -= v
                        else:
                            noisy += v
                if use_in:
                    f = noisy
                else:
                    f = field
                old = spins[i]
                new = old
                if rule == RULE_GIBBS:
                    x = -2.0 * f / t
                    if x > EXP_CUTOFF:
                        pup = 0.0
                    else:
                        pup = 1.0 / (1.0 + exp(x))
                    if u_acc[sw, i] < pup:
                        new = 1
                    else:
                        new = -1
                elif rule == RULE_METROPOLIS:
                    d = 2.0 * old * f
                    if d <= 0.0:
                        new = -old
                    elif u_acc[sw, i] < exp(-d / t):
                        new = -old
                else:
                    # zero local field: deterministic tie-break to +1
                    new = 1 if f >= 0.0 else -1
                if new != old:
                    d = 2.0 * old * field
                    energy += d
                    spins[i] = new
                    n_acc += 1
                    if d > uphill:
                        uphill = d
                    if energy < best_energy:
                        best_energy = energy
                        for q in range(n):
                            best_spins[q] = spins[q]
                if use_out and u_out[sw, i] < p_out:
                    d = 2.0 * spins[i] * field
                    energy += d
                    spins[i] = -spins[i]
                    if energy < best_energy:
                        best_energy = energy
                        for q in range(n):
                            best_spins[q] = spins[q]
            trace[sw] = best_energy
            accepted[sw] = n_acc
            max_uphill[sw] = uphill
            if do_record:
                for q in range(n):
                    record[sw, q] = spins[q]
            if not isfinite(energy):
                status = sw
                break
    return status, energy, best_energy


def cim_steps(const int64_t[::1] indptr, const int64_t[::1] indices,
              const double[::1] data, const double[::1] h, double offset,
              double[::1] amps, const double[::1] pumps, double dt, double eps,
              double noise_amp, const double[:, ::1] xi, double saturation,
              Py_ssize_t readout_every, Py_ssize_t step0, Py_ssize_t total_steps,
              int8_t[::1] best_spins, double best_energy, double[::1] trace,
              Py_ssize_t trace_pos):
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t nsteps = pumps.shape[0]
    cdef bint use_noise = noise_amp > 0.0
    cdef double sq = sqrt(dt)
    cdef double[::1] field = np.zeros(n)
    cdef int8_t[::1] sig = np.ones(n, dtype=np.int8)
    cdef Py_ssize_t st, i, p, g, q
    cdef double pump, f, ai, na, e, acc
    cdef bint bad
    cdef Py_ssize_t status = -1
    with nogil:
        for st in range(nsteps):
            pump = pumps[st]
            for i in range(n):
                f = h[i]
                for p in range(indptr[i], indptr[i + 1]):
                    f += data[p] * amps[indices[p]]
                field[i] = f
            bad = False
            for i in range(n):
                ai = amps[i]
                na = ai + ((pump - 1.0 - ai * ai) * ai + eps * field[i]) * dt
                if use_noise:
                    na += noise_amp * sq * xi[st, i]
                if not isfinite(na):
                    bad = True
                if na > saturation:
                    na = saturation
                elif na < -saturation:
                    na = -saturation
                amps[i] = na
            if bad:
                status = step0 + st
                break
            g = step0 + st
            if (g + 1) % readout_every == 0 or g + 1 == total_steps:
                for i in range(n):
                    if amps[i] >= 0.0:
                        sig[i] = 1
                    else:
                        sig[i] = -1
                e = 0.0
                for i in range(n):
                    acc = 0.0
                    for p in range(indptr[i], indptr[i + 1]):
                        acc += data[p] * sig[indices[p]]
                    e -= 0.5 * sig[i] * acc
                    e -= h[i] * sig[i]
                e += offset
                if e < best_energy:
                    best_energy = e
                    for q in range(n):
                        best_spins[q] = sig[q]
                trace[trace_pos] = best_energy
                trace_pos += 1
    return status, best_energy, trace_pos


def scan_states(const int64_t[::1] indptr, const int64_t[::1] indices,
                const double[::1] data, const double[::1] h, double offset,
                int n, double tol):
    """Gray-code scan; each step flips one spin and updates energy in O(degree)."""
    cdef double[::1] fieldv = np.array(h, dtype=np.float64)
    cdef int8_t[::1] s = -np.ones(n, dtype=np.int8)
    cdef uint64_t total = (<uint64_t>1) << n
    cdef uint64_t k, mask = 0
    cdef Py_ssize_t b, p, i
    cdef double e = offset, best
    cdef vector[int64_t] keep
    # start from all spins -1: local fields and energy computed directly
    for i in range(n):
        fieldv[i] = h[i]
        for p in range(indptr[i], indptr[i + 1]):
            fieldv[i] -= data[p]
    for i in range(n):
        e += h[i]
        for p in range(indptr[i], indptr[i + 1]):
            if indices[p] > i:
                e -= data[p]
    best = e
    keep.push_back(0)
    with nogil:
        for k in range(1, total):
            b = 0
            while not ((k >> b) & 1):
                b += 1
            e += 2.0 * s[b] * fieldv[b]
            s[b] = -s[b]
            mask ^= (<uint64_t>1) << b
            for p in range(indptr[b], indptr[b + 1]):
                fieldv[indices[p]] += 2.0 * data[p] * s[b]
            if e < best - tol:
                best = e
                keep.clear()
                keep.push_back(<int64_t>mask)
            elif e <= best + tol:
                if e < best:
                    best = e
                keep.push_back(<int64_t>mask)
    out = np.empty(keep.size(), dtype=np.int64)
    cdef int64_t[::1] ov = out
    for i in range(<Py_ssize_t>keep.size()):
        ov[i] = keep[i]
    return best, out
