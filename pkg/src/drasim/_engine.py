"""Numba kernels behind the event-driven simulator. Internal module.

The kernels consume numpy Generators directly, two draws per event
(waiting time, node pick) from the environment stream plus per-target
draws from the strategy stream for random allocation. The pure-Python
pieces in :mod:`drasim.simulator` and :mod:`drasim.strategies` follow the
same draw order, so a Python loop over allocate/step with equally seeded
generators reproduces engine trajectories exactly.
"""

import numpy as np
from numba import njit

MODE_GLRIE = 0
MODE_LRIE = 1
MODE_STATIC = 2
MODE_RAND = 3
MODE_FROZEN = 4


@njit(cache=True)
def _reallocate(
    mode, budget, indptr, indices, off, itab, htab,
    x, ninf, n_infected, rank_of, frozen_mask, r_mask,
    scores_buf, c_buf, infected_buf, rng_strat,
):
    """Rebuild r_mask in place; returns the number of treated nodes."""
    n = x.size
    for v in range(n):
        r_mask[v] = 0
    if mode == MODE_FROZEN:
        cnt = 0
        for v in range(n):
            if frozen_mask[v] == 1 and x[v] == 1:
                r_mask[v] = 1
                cnt += 1
        return cnt
    k = budget if budget < n_infected else n_infected
    if k <= 0:
        return 0
    m = 0
    for v in range(n):
        if x[v] == 1:
            infected_buf[m] = v
            m += 1
    if mode == MODE_RAND:
        for j in range(k):
            swap = j + rng_strat.integers(0, m - j)
            tmp = infected_buf[j]
            infected_buf[j] = infected_buf[swap]
            infected_buf[swap] = tmp
        for j in range(k):
            r_mask[infected_buf[j]] = 1
        return k
    if mode == MODE_GLRIE:
        # c[l]: rate change at node l when one infected neighbor turns healthy
        for v in range(n):
            nl = ninf[v]
            if nl >= 1:
                base = off[v] + nl
                if x[v] == 1:
                    c_buf[v] = htab[base] - htab[base - 1]
                else:
                    c_buf[v] = -(itab[base] - itab[base - 1])
            else:
                c_buf[v] = 0.0
        for idx in range(m):
            i = infected_buf[idx]
            base = off[i] + ninf[i]
            acc = htab[base] + itab[base]
            for e in range(indptr[i], indptr[i + 1]):
                acc += c_buf[indices[e]]
            scores_buf[idx] = -acc
    elif mode == MODE_LRIE:
        for idx in range(m):
            i = infected_buf[idx]
            deg = indptr[i + 1] - indptr[i]
            scores_buf[idx] = float(deg - 2 * ninf[i])
    else:  # MODE_STATIC: earlier rank wins
        for idx in range(m):
            scores_buf[idx] = -float(rank_of[infected_buf[idx]])
    # top-k, score descending with ties to the lowest node id
    # (infected_buf ascends, and strict > keeps the first maximum)
    for _slot in range(k):
        best = 0
        best_score = -np.inf
        for idx in range(m):
            s = scores_buf[idx]
            if s > best_score:
                best_score = s
                best = idx
        r_mask[infected_buf[best]] = 1
        scores_buf[best] = -np.inf
    return k


@njit(cache=True)
def gillespie_run(
    indptr, indices, off, itab, htab,
    x0, mode, rank_of, frozen_mask,
    budget, rho, t_max, realloc_interval, debug_every,
    rng_env, rng_strat,
):
    """Exact event-driven run of the controlled process.

    Returns (times, nodes, new_states, final_time). final_time is the last
    event time when the run ends in the absorbing all-healthy state,
    otherwise t_max.
    """
    n = x0.size
    x = x0.copy()
    ninf = np.zeros(n, np.int32)
    n_infected = 0
    for v in range(n):
        if x[v] == 1:
            n_infected += 1
            for e in range(indptr[v], indptr[v + 1]):
                ninf[indices[e]] += 1

    r_mask = np.zeros(n, np.uint8)
    lam = np.zeros(n)
    scores_buf = np.empty(n)
    c_buf = np.empty(n)
    infected_buf = np.empty(n, np.int64)

    cap = 4096
    ev_t = np.empty(cap)
    ev_node = np.empty(cap, np.int32)
    ev_state = np.empty(cap, np.uint8)
    n_ev = 0

    t = 0.0
    next_realloc = realloc_interval
    interval_mode = realloc_interval > 0.0

    cnt = _reallocate(
        mode, budget, indptr, indices, off, itab, htab,
        x, ninf, n_infected, rank_of, frozen_mask, r_mask,
        scores_buf, c_buf, infected_buf, rng_strat,
    )
    if mode != MODE_FROZEN and cnt > budget:
        raise ValueError("allocation exceeded budget")

    absorbed = False
    while True:
        lam_total = 0.0
        for v in range(n):
            base = off[v] + ninf[v]
            if x[v] == 1:
                lv = htab[base] + rho * r_mask[v]
            else:
                lv = itab[base]
            lam[v] = lv
            lam_total += lv
        if lam_total <= 0.0:
            # a scheduled reallocation may still revive activity
            if interval_mode and next_realloc < t_max:
                t = next_realloc
                next_realloc += realloc_interval
                _reallocate(
                    mode, budget, indptr, indices, off, itab, htab,
                    x, ninf, n_infected, rank_of, frozen_mask, r_mask,
                    scores_buf, c_buf, infected_buf, rng_strat,
                )
                continue
            absorbed = True
            break
        u = rng_env.random()
        wait = -np.log1p(-u) / lam_total
        if interval_mode and next_realloc < t_max and t + wait > next_realloc:
            # memorylessness lets us discard the draw past the boundary
            t = next_realloc
            next_realloc += realloc_interval
            _reallocate(
                mode, budget, indptr, indices, off, itab, htab,
                x, ninf, n_infected, rank_of, frozen_mask, r_mask,
                scores_buf, c_buf, infected_buf, rng_strat,
            )
            continue
        if t + wait > t_max:
            break
        t = t + wait
        target = rng_env.random() * lam_total
        acc = 0.0
        node = n - 1
        for v in range(n):
            acc += lam[v]
            if acc >= target:
                node = v
                break
        if x[node] == 1:
            x[node] = 0
            n_infected -= 1
            for e in range(indptr[node], indptr[node + 1]):
                ninf[indices[e]] -= 1
        else:
            x[node] = 1
            n_infected += 1
            for e in range(indptr[node], indptr[node + 1]):
                ninf[indices[e]] += 1

        if n_ev == cap:
            cap2 = cap * 2
            t_new = np.empty(cap2)
            node_new = np.empty(cap2, np.int32)
            state_new = np.empty(cap2, np.uint8)
            t_new[:cap] = ev_t
            node_new[:cap] = ev_node
            state_new[:cap] = ev_state
            ev_t = t_new
            ev_node = node_new
            ev_state = state_new
            cap = cap2
        ev_t[n_ev] = t
        ev_node[n_ev] = node
        ev_state[n_ev] = x[node]
        n_ev += 1

        if debug_every > 0 and n_ev % debug_every == 0:
            chk = 0
            for v in range(n):
                s = 0
                for e in range(indptr[v], indptr[v + 1]):
                    s += x[indices[e]]
                if s != ninf[v]:
                    raise ValueError("infected-neighbor cache drifted")
                chk += x[v]
            if chk != n_infected:
                raise ValueError("infected-count cache drifted")

        if interval_mode or mode == MODE_FROZEN:
            if x[node] == 0 and r_mask[node] == 1:
                r_mask[node] = 0  # freed resource waits for the next boundary
        else:
            cnt = _reallocate(
                mode, budget, indptr, indices, off, itab, htab,
                x, ninf, n_infected, rank_of, frozen_mask, r_mask,
                scores_buf, c_buf, infected_buf, rng_strat,
            )
            if mode != MODE_FROZEN and cnt > budget:
                raise ValueError("allocation exceeded budget")

    if absorbed and n_infected == 0:
        final_time = ev_t[n_ev - 1] if n_ev > 0 else 0.0
    else:
        final_time = t_max
    return ev_t[:n_ev].copy(), ev_node[:n_ev].copy(), ev_state[:n_ev].copy(), final_time


@njit(cache=True)
def mc_increment(
    indptr, indices, off, itab, htab,
    x0, r0, rho, horizon, runs, rng,
):
    """Monte-Carlo sum and sum-of-squares of N_I(horizon) - N_I(0).

    The treated set is frozen at r0 (dropped from nodes that recover);
    no reallocation happens inside the horizon.
    """
    n = x0.size
    ninf0 = np.zeros(n, np.int32)
    for v in range(n):
        if x0[v] == 1:
            for e in range(indptr[v], indptr[v + 1]):
                ninf0[indices[e]] += 1
    lam0 = np.zeros(n)
    lam_total0 = 0.0
    for v in range(n):
        base = off[v] + ninf0[v]
        if x0[v] == 1:
            lv = htab[base] + rho * r0[v]
        else:
            lv = itab[base]
        lam0[v] = lv
        lam_total0 += lv

    x = np.empty_like(x0)
    ninf = np.empty_like(ninf0)
    r = np.empty_like(r0)
    lam = np.empty_like(lam0)

    sum_d = 0.0
    sum_d2 = 0.0
    if lam_total0 <= 0.0:
        return sum_d, sum_d2
    for _run in range(runs):
        u = rng.random()
        wait = -np.log1p(-u) / lam_total0
        if wait > horizon:
            continue
        x[:] = x0
        ninf[:] = ninf0
        r[:] = r0
        lam[:] = lam0
        lam_total = lam_total0
        t = wait
        delta = 0
        while True:
            target = rng.random() * lam_total
            acc = 0.0
            node = n - 1
            for v in range(n):
                acc += lam[v]
                if acc >= target:
                    node = v
                    break
            if x[node] == 1:
                x[node] = 0
                delta -= 1
                r[node] = 0
                for e in range(indptr[node], indptr[node + 1]):
                    ninf[indices[e]] -= 1
            else:
                x[node] = 1
                delta += 1
                for e in range(indptr[node], indptr[node + 1]):
                    ninf[indices[e]] += 1
            lam_total = 0.0
            for v in range(n):
                base = off[v] + ninf[v]
                if x[v] == 1:
                    lv = htab[base] + rho * r[v]
                else:
                    lv = itab[base]
                lam[v] = lv
                lam_total += lv
            if lam_total <= 0.0:
                break
            u = rng.random()
            t += -np.log1p(-u) / lam_total
            if t > horizon:
                break
        sum_d += delta
        sum_d2 += delta * delta
    return sum_d, sum_d2
