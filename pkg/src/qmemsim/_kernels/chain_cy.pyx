# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled chain-stepping kernel.

Statement-for-statement twin of chain_py.run_chain_steps; the two backends
must stay bit-identical, so any change here has to be mirrored there. The
RNG draws go through the numpy Generator objects handed in by the caller,
which keeps noisy runs reproducible across backends.
"""

import numpy as np


cdef inline double _clamp01(double v) nogil:
    if v < 0.0:
        return 0.0
    if v > 1.0:
        return 1.0
    return v


def run_chain_steps(
    double[::1] drive_split,
    double[::1] drive_acc,
    long long[::1] steps_per_exposure,
    long long[::1] window_len,
    long long[::1] latency_steps,
    double[::1] init_r,
    unsigned char[::1] prefill_window,
    unsigned char[::1] noise_flags,
    unsigned char[::1] combined_flags,
    double[::1] eta,
    long long[::1] trials,
    double[::1] pulse_budget,
    object rngs,
    double[:, ::1] out_r,
    double[:, ::1] out_refl,
    double[:, ::1] out_trans,
):
    cdef Py_ssize_t n_steps = drive_split.shape[0]
    cdef Py_ssize_t n_nodes = out_r.shape[1]
    cdef Py_ssize_t i, j, k
    cdef long long max_w = 1, max_p = 2, cap, w, m, start, tail
    cdef double x, a, ri, nr, nt, mean_n, mean_r, est, p, pt, denom, total, new_r
    cdef long long counts, counts_t

    for i in range(n_nodes):
        if window_len[i] > max_w:
            max_w = window_len[i]
    for i in range(n_nodes):
        m = steps_per_exposure[i]
        if m < 1:
            m = 1
        cap = latency_steps[i] // m + 2
        if cap > max_p:
            max_p = cap

    r_arr = np.zeros(n_nodes, dtype=np.float64)
    win_arr = np.zeros((n_nodes, max_w), dtype=np.float64)
    win_count_arr = np.zeros(n_nodes, dtype=np.int64)
    win_pos_arr = np.zeros(n_nodes, dtype=np.int64)
    pend_step_arr = np.zeros((n_nodes, max_p), dtype=np.int64)
    pend_r_arr = np.zeros((n_nodes, max_p), dtype=np.float64)
    pend_head_arr = np.zeros(n_nodes, dtype=np.int64)
    pend_count_arr = np.zeros(n_nodes, dtype=np.int64)
    acc_n_arr = np.zeros(n_nodes, dtype=np.float64)
    acc_r_arr = np.zeros(n_nodes, dtype=np.float64)
    k_exp_arr = np.zeros(n_nodes, dtype=np.int64)
    prev_est_arr = np.zeros(n_nodes, dtype=np.float64)

    cdef double[::1] r = r_arr
    cdef double[:, ::1] win = win_arr
    cdef long long[::1] win_count = win_count_arr
    cdef long long[::1] win_pos = win_pos_arr
    cdef long long[:, ::1] pend_step = pend_step_arr
    cdef double[:, ::1] pend_r = pend_r_arr
    cdef long long[::1] pend_head = pend_head_arr
    cdef long long[::1] pend_count = pend_count_arr
    cdef double[::1] acc_n = acc_n_arr
    cdef double[::1] acc_r = acc_r_arr
    cdef long long[::1] k_exp = k_exp_arr
    cdef double[::1] prev_est = prev_est_arr

    for i in range(n_nodes):
        r[i] = init_r[i]
        prev_est[i] = init_r[i]
        if prefill_window[i]:
            w = window_len[i]
            for k in range(w):
                win[i, k] = init_r[i]
            win_count[i] = w
            win_pos[i] = w % max_w

    for j in range(n_steps):
        x = drive_split[j]
        a = drive_acc[j]
        for i in range(n_nodes):
            while pend_count[i] > 0 and pend_step[i, pend_head[i]] <= j:
                r[i] = pend_r[i, pend_head[i]]
                pend_head[i] = (pend_head[i] + 1) % max_p
                pend_count[i] -= 1

            ri = r[i]
            nr = ri * x
            nt = x - nr
            out_r[j, i] = ri
            out_refl[j, i] = nr
            out_trans[j, i] = nt

            acc_n[i] += a
            acc_r[i] += ri
            k_exp[i] += 1

            if k_exp[i] == steps_per_exposure[i]:
                m = steps_per_exposure[i]
                mean_n = acc_n[i] / m
                mean_r = acc_r[i] / m
                if not noise_flags[i]:
                    est = _clamp01(mean_n)
                else:
                    p = _clamp01(eta[i] * mean_r * mean_n)
                    counts = <long long> (rngs[i].binomial(int(trials[i]), p))
                    if combined_flags[i]:
                        pt = _clamp01(eta[i] * (1.0 - mean_r) * mean_n)
                        counts_t = <long long> (rngs[i].binomial(int(trials[i]), pt))
                        denom = pulse_budget[i] * eta[i]
                        if denom <= 0.0:
                            est = prev_est[i]
                        else:
                            est = _clamp01((counts + counts_t) / denom)
                    else:
                        denom = pulse_budget[i] * eta[i] * mean_r
                        if mean_r < 1e-3 or denom <= 0.0:
                            est = prev_est[i]
                        else:
                            est = _clamp01(counts / denom)
                prev_est[i] = est

                w = window_len[i]
                win[i, win_pos[i]] = est
                win_pos[i] = (win_pos[i] + 1) % max_w
                if win_count[i] < w:
                    win_count[i] += 1
                start = (win_pos[i] - win_count[i] + max_w) % max_w
                total = 0.0
                for k in range(win_count[i]):
                    total += win[i, (start + k) % max_w]
                new_r = _clamp01(total / win_count[i])

                tail = (pend_head[i] + pend_count[i]) % max_p
                pend_step[i, tail] = j + 1 + latency_steps[i]
                pend_r[i, tail] = new_r
                pend_count[i] += 1

                acc_n[i] = 0.0
                acc_r[i] = 0.0
                k_exp[i] = 0

            x = nt
            a = nt
