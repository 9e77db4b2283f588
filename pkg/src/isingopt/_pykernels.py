"""Pure-Python kernels. Mirrors ``_kernels.pyx`` operation for operation.

All random numbers are drawn by the callers and passed in, so both backends
consume identical streams and produce bit-identical results. Keep the
arithmetic order of the two files in lockstep.
"""

import math

import numpy as np

RULE_GIBBS = 0
RULE_METROPOLIS = 1
RULE_GREEDY = 2

# exp() argument beyond which the Gibbs up-probability is treated as exactly 0
EXP_CUTOFF = 700.0


def anneal_sweeps(indptr, indices, data, h, spins, temps, rule, order,
                  u_acc, p_in, u_in, p_out, u_out, energy, best_energy,
                  best_spins, trace, accepted, max_uphill, record):
    """Run ``len(temps)`` sweeps in place.

    Returns ``(status, energy, best_energy)``; ``status`` is -1 on success or the
    index of the first sweep whose running energy became non-finite.
    """
    indptr = indptr.tolist()
    indices = indices.tolist()
    data = data.tolist()
    h = h.tolist()
    s = spins.tolist()
    n = len(s)
    nsweeps = len(temps)
    use_order = order.shape[0] > 0
    use_in = p_in > 0.0
    use_out = p_out > 0.0
    do_record = record.shape[0] > 0
    status = -1
    for sw in range(nsweeps):
        t = float(temps[sw])
        acc_row = u_acc[sw].tolist()
        ord_row = order[sw].tolist() if use_order else None
        in_row = u_in[sw].tolist() if use_in else None
        out_row = u_out[sw].tolist() if use_out else None
        n_acc = 0
        uphill = -math.inf
        for k in range(n):
            i = ord_row[k] if use_order else k
            field = h[i]
            noisy = h[i]
            for p in range(indptr[i], indptr[i + 1]):
                v = data[p] * s[indices[p]]
                field += v
                if use_in:
                    if in_row[p] < p_in:
                        noisy -= v
                    else:
                        noisy += v
            f = noisy if use_in else field
            old = s[i]
            new = old
            if rule == RULE_GIBBS:
                x = -2.0 * f / t
                if x > EXP_CUTOFF:
                    pup = 0.0
                else:
                    pup = 1.0 / (1.0 + math.exp(x))
                new = 1 if acc_row[i] < pup else -1
            elif rule == RULE_METROPOLIS:
                d = 2.0 * old * f
                if d <= 0.0:
                    new = -old
                elif acc_row[i] < math.exp(-d / t):
                    new = -old
            else:
                # zero local field: deterministic tie-break to +1
                new = 1 if f >= 0.0 else -1
            if new != old:
                d = 2.0 * old * field
                energy += d
                s[i] = new
                n_acc += 1
                if d > uphill:
                    uphill = d
                if energy < best_energy:
                    best_energy = energy
                    best_spins[:] = s
            if use_out and out_row[i] < p_out:
                d = 2.0 * s[i] * field
                energy += d
                s[i] = -s[i]
                if energy < best_energy:
                    best_energy = energy
                    best_spins[:] = s
        trace[sw] = best_energy
        accepted[sw] = n_acc
        max_uphill[sw] = uphill
        if do_record:
            record[sw, :] = s
        if not math.isfinite(energy):
            status = sw
            break
    spins[:] = s
    return status, energy, best_energy


def cim_steps(indptr, indices, data, h, offset, amps, pumps, dt, eps,
              noise_amp, xi, saturation, readout_every, step0, total_steps,
              best_spins, best_energy, trace, trace_pos):
    """Euler-Maruyama integration of the oscillator network, in place.

    Returns ``(status, best_energy, trace_pos)``; ``status`` is -1 on success or
    the global step index at which an amplitude became non-finite.
    """
    indptr = indptr.tolist()
    indices = indices.tolist()
    data = data.tolist()
    h = h.tolist()
    a = amps.tolist()
    n = len(a)
    use_noise = noise_amp > 0.0
    sq = math.sqrt(dt)
    field = [0.0] * n
    sig = [1] * n
    status = -1
    for st in range(len(pumps)):
        pump = float(pumps[st])
        xi_row = xi[st].tolist() if use_noise else None
        for i in range(n):
            f = h[i]
            for p in range(indptr[i], indptr[i + 1]):
                f += data[p] * a[indices[p]]
            field[i] = f
        bad = False
        for i in range(n):
            ai = a[i]
            na = ai + ((pump - 1.0 - ai * ai) * ai + eps * field[i]) * dt
            if use_noise:
                na += noise_amp * sq * xi_row[i]
            if not math.isfinite(na):
                bad = True
            if na > saturation:
                na = saturation
            elif na < -saturation:
                na = -saturation
            a[i] = na
        if bad:
            status = step0 + st
            break
        g = step0 + st
        if (g + 1) % readout_every == 0 or g + 1 == total_steps:
            for i in range(n):
                sig[i] = 1 if a[i] >= 0.0 else -1
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
                best_spins[:] = sig
            trace[trace_pos] = best_energy
            trace_pos += 1
    amps[:] = a
    return status, best_energy, trace_pos


def scan_states(indptr, indices, data, h, offset, n, tol):
    """Scan all 2**n spin states.

    Bit ``i`` of a mask is 1 when spin ``i`` is +1. Returns ``(best, masks)``
    where ``masks`` holds every state within ``tol`` of ``best`` (the incremental
    running minimum). Vectorized: the low ``k`` spins are tabulated once, and
    each chunk of high-spin patterns is combined with the table through one
    matrix product for the cross couplings. Summation order is not that of the
    compiled kernel, callers must re-score candidates.
    """
    i_arr, j_arr, v_arr = _pairs_from_csr(indptr, indices, data)
    h = np.asarray(h, dtype=np.float64)
    k = min(n, 12)
    # i < j always, so a pair is low-low, high-high or (low i, high j)
    low = j_arr < k
    hh = i_arr >= k
    cross = ~low & ~hh
    s_low = _spin_table(np.arange(1 << k, dtype=np.int64), k)
    e_low = _partial_energy(s_low, i_arr[low], j_arr[low], v_arr[low], h[:k])
    j_cross = np.zeros((n - k, k))
    np.add.at(j_cross, (j_arr[cross] - k, i_arr[cross]), v_arr[cross])
    m = n - k
    chunk = max(1, (1 << 18) >> k)
    best = math.inf
    keep: list[np.ndarray] = []
    for start in range(0, 1 << m, chunk):
        hi_idx = np.arange(start, min(start + chunk, 1 << m), dtype=np.int64)
        s_high = _spin_table(hi_idx, m)
        e_high = _partial_energy(s_high, i_arr[hh] - k, j_arr[hh] - k, v_arr[hh], h[k:]) + offset
        e = e_high[:, None] + e_low[None, :] - (s_high @ j_cross) @ s_low.T
        mn = float(e.min())
        if mn < best - tol:
            best = mn
            keep = []
        elif mn < best:
            best = mn
        r, c = np.nonzero(e <= best + tol)
        if r.size:
            keep.append((hi_idx[r] << k) | c)
    masks = np.concatenate(keep) if keep else np.zeros(0, dtype=np.int64)
    return best, masks


def _spin_table(masks, width):
    return ((masks[:, None] >> np.arange(width, dtype=np.int64)) & 1) * 2.0 - 1.0


def _partial_energy(s, i_arr, j_arr, v_arr, h):
    return -(s[:, i_arr] * s[:, j_arr]) @ v_arr - s @ h


def _pairs_from_csr(indptr, indices, data):
    rows = np.repeat(np.arange(len(indptr) - 1), np.diff(indptr))
    upper = rows < indices
    return rows[upper], np.asarray(indices)[upper], np.asarray(data)[upper]
