"""Compiled slot loop for the Random-Collect simulator.

Packets are integer ids ``(round - 1) * k + source_index`` so no per-packet
records are kept. Queues live in a dense ``(n, cap)`` buffer; the loop stops
early and reports the slot it reached whenever a queue could overflow, and the
caller grows the buffer and resumes with the same random draws.
"""
import numpy as np
from numba import njit

# indices into the int64 ``counters`` array
GENERATED = 0
ABSORBED = 1
ABSORBED_POST = 2
ROUND_BASE = 3
CONSERVATION_FAIL = 4
MULTI_TX_FAIL = 5
N_COUNTERS = 6


@njit(cache=True)
def run_block(
    t0,
    n_slots,
    offset,
    horizon,
    burn_in,
    beta,
    sink,
    sources,
    row_ptr,
    dest_idx,
    dest_cdf,
    arr_u,
    pick_u,
    dest_u,
    qbuf,
    qlen,
    next_round,
    counters,
    occ,
    occ2,
    drift_sum,
    drift_cnt,
    round_births,
    round_last_birth,
    round_absorbed,
    round_last_absorb,
    traj,
    sample_every,
    n_batches,
):
    """Advance slots ``t0 + offset .. t0 + n_slots - 1``; return the first slot not run."""
    n = qlen.shape[0]
    k = sources.shape[0]
    cap = qbuf.shape[1]
    n_rounds = round_births.shape[0]
    measured = horizon - burn_in
    send_pkt = np.empty(n, dtype=np.int64)
    send_dest = np.empty(n, dtype=np.int64)
    q_before = np.empty(n, dtype=np.int64)
    tx_count = np.zeros(n, dtype=np.int64)

    for b in range(offset, n_slots):
        t = t0 + b
        qmax = 0
        for u in range(n):
            if qlen[u] > qmax:
                qmax = qlen[u]
        if qmax + n + 1 > cap:
            return b

        if t == burn_in:
            base = 0
            for j in range(k):
                if next_round[j] > base:
                    base = next_round[j]
            counters[ROUND_BASE] = base

        if t % sample_every == 0:
            s = t // sample_every
            if s < traj.shape[0]:
                total = 0
                for u in range(n):
                    total += qlen[u]
                traj[s, 0] = t
                traj[s, 1] = qmax
                traj[s, 2] = total

        post = t >= burn_in
        if post:
            batch = (t - burn_in) * n_batches // measured
            for u in range(n):
                q_before[u] = qlen[u]
                if qlen[u] > 0:
                    occ[batch, u] += 1
                    if qlen[u] > 1:
                        occ2[batch, u] += 1

        # (1) every busy non-sink node picks one packet and a destination from start-of-slot state
        for u in range(n):
            send_dest[u] = -1
            tx_count[u] = 0
            if u == sink or qlen[u] == 0:
                continue
            i = int(pick_u[b, u] * qlen[u])
            if i >= qlen[u]:
                i = qlen[u] - 1
            x = dest_u[b, u]
            j = row_ptr[u]
            last = row_ptr[u + 1] - 1
            while j < last and dest_cdf[j] <= x:
                j += 1
            v = dest_idx[j]
            tx_count[u] += 1
            if v == u:
                continue
            send_pkt[u] = qbuf[u, i]
            qlen[u] -= 1
            qbuf[u, i] = qbuf[u, qlen[u]]
            send_dest[u] = v

        for u in range(n):
            if tx_count[u] > 1:
                counters[MULTI_TX_FAIL] += 1

        # (2) deliveries; the sink absorbs
        base = counters[ROUND_BASE]
        for u in range(n):
            v = send_dest[u]
            if v < 0:
                continue
            pkt = send_pkt[u]
            if v == sink:
                counters[ABSORBED] += 1
                if post:
                    counters[ABSORBED_POST] += 1
                    rel = pkt // k + 1 - base
                    if rel >= 1 and rel <= n_rounds:
                        round_absorbed[rel - 1] += 1
                        round_last_absorb[rel - 1] = t
            else:
                qbuf[v, qlen[v]] = pkt
                qlen[v] += 1

        # (3) Bernoulli arrivals at the sources
        for j in range(k):
            if arr_u[b, j] < beta:
                rnd = next_round[j] + 1
                next_round[j] = rnd
                u = sources[j]
                qbuf[u, qlen[u]] = (rnd - 1) * k + j
                qlen[u] += 1
                counters[GENERATED] += 1
                if post:
                    rel = rnd - base
                    if rel >= 1 and rel <= n_rounds:
                        round_births[rel - 1] += 1
                        round_last_birth[rel - 1] = t

        if post:
            for u in range(n):
                if q_before[u] > 0:
                    drift_sum[u] += qlen[u] - q_before[u]
                    drift_cnt[u] += 1

        total = 0
        for u in range(n):
            total += qlen[u]
        if counters[GENERATED] != total + counters[ABSORBED]:
            counters[CONSERVATION_FAIL] += 1
    return n_slots
