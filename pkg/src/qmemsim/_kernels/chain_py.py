"""Pure-Python chain-stepping kernel.

Mirrors chain_cy.pyx statement for statement; both backends must produce
bit-identical outputs for the same inputs, so keep every arithmetic
expression and every loop order in sync when editing either file.

Per step and per node: apply feedback updates whose latency has elapsed,
split the node input with the reflectivity in force, accumulate the running
exposure, and at exposure boundaries form the input estimate (exact mean or
counts-based), refresh the window, and queue the new reflectivity.
"""

from __future__ import annotations

R_FLOOR = 1e-3


def run_chain_steps(
    drive_split,      # float64[n_steps] node-1 populations at step starts
    drive_acc,        # float64[n_steps] node-1 estimator samples (mid-step)
    steps_per_exposure,  # int64[n_nodes]
    window_len,       # int64[n_nodes]
    latency_steps,    # int64[n_nodes]
    init_r,           # float64[n_nodes] starting reflectivity
    prefill_window,   # uint8[n_nodes] 1 to pre-fill the window with init_r
    noise_flags,      # uint8[n_nodes] 1 to draw binomial counts
    combined_flags,   # uint8[n_nodes] 1 to add the transmitted-arm counts
    eta,              # float64[n_nodes] detection efficiency
    trials,           # int64[n_nodes] pump pulses per exposure
    pulse_budget,     # float64[n_nodes] pulse_rate * exposure (inversion denominator)
    rngs,             # per-node numpy Generators (unused when not shot_noise)
    out_r,            # float64[n_steps, n_nodes]
    out_refl,
    out_trans,
):
    n_steps = drive_split.shape[0]
    n_nodes = out_r.shape[1]

    max_w = 1
    for i in range(n_nodes):
        if window_len[i] > max_w:
            max_w = int(window_len[i])
    max_p = 2
    for i in range(n_nodes):
        cap = int(latency_steps[i] // max(1, int(steps_per_exposure[i]))) + 2
        if cap > max_p:
            max_p = cap

    r = [0.0] * n_nodes
    win = [[0.0] * max_w for _ in range(n_nodes)]
    win_count = [0] * n_nodes
    win_pos = [0] * n_nodes
    pend_step = [[0] * max_p for _ in range(n_nodes)]
    pend_r = [[0.0] * max_p for _ in range(n_nodes)]
    pend_head = [0] * n_nodes
    pend_count = [0] * n_nodes
    acc_n = [0.0] * n_nodes
    acc_r = [0.0] * n_nodes
    k_exp = [0] * n_nodes
    prev_est = [0.0] * n_nodes

    for i in range(n_nodes):
        r[i] = init_r[i]
        prev_est[i] = init_r[i]
        if prefill_window[i]:
            w = int(window_len[i])
            for k in range(w):
                win[i][k] = init_r[i]
            win_count[i] = w
            win_pos[i] = w % max_w

    for j in range(n_steps):
        x = drive_split[j]
        a = drive_acc[j]
        for i in range(n_nodes):
            while pend_count[i] > 0 and pend_step[i][pend_head[i]] <= j:
                r[i] = pend_r[i][pend_head[i]]
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
                    est = mean_n
                    if est < 0.0:
                        est = 0.0
                    elif est > 1.0:
                        est = 1.0
                else:
                    p = eta[i] * mean_r * mean_n
                    if p < 0.0:
                        p = 0.0
                    elif p > 1.0:
                        p = 1.0
                    counts = int(rngs[i].binomial(int(trials[i]), p))
                    if combined_flags[i]:
                        pt = eta[i] * (1.0 - mean_r) * mean_n
                        if pt < 0.0:
                            pt = 0.0
                        elif pt > 1.0:
                            pt = 1.0
                        counts_t = int(rngs[i].binomial(int(trials[i]), pt))
                        denom = pulse_budget[i] * eta[i]
                        if denom <= 0.0:
                            est = prev_est[i]
                        else:
                            est = (counts + counts_t) / denom
                            if est < 0.0:
                                est = 0.0
                            elif est > 1.0:
                                est = 1.0
                    else:
                        denom = pulse_budget[i] * eta[i] * mean_r
                        if mean_r < R_FLOOR or denom <= 0.0:
                            est = prev_est[i]
                        else:
                            est = counts / denom
                            if est < 0.0:
                                est = 0.0
                            elif est > 1.0:
                                est = 1.0
                prev_est[i] = est

                w = int(window_len[i])
                win[i][win_pos[i]] = est
                win_pos[i] = (win_pos[i] + 1) % max_w
                if win_count[i] < w:
                    win_count[i] += 1
                start = (win_pos[i] - win_count[i] + max_w) % max_w
                total = 0.0
                for k in range(win_count[i]):
                    total += win[i][(start + k) % max_w]
                new_r = total / win_count[i]
                if new_r < 0.0:
                    new_r = 0.0
                elif new_r > 1.0:
                    new_r = 1.0

                tail = (pend_head[i] + pend_count[i]) % max_p
                pend_step[i][tail] = j + 1 + int(latency_steps[i])
                pend_r[i][tail] = new_r
                pend_count[i] += 1

                acc_n[i] = 0.0
                acc_r[i] = 0.0
                k_exp[i] = 0

            x = nt
            a = nt
