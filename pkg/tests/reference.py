"""Independent reference implementations used as test oracles.

Deliberately naive and written against the model semantics alone (dict/set
based, full enumeration) so they share no code with the library paths they
check.
"""

import itertools


def naive_cascade(n, edges, seeds, coins):
    """Count-based cascade with pre-drawn coins.

    coins[v] is the list of outcomes for attempts 1, 2, ... on v. Returns
    (final active set, list of (u, v, attempt_index, outcome)).
    """
    in_nbrs = {v: sorted(u for (u, w) in edges if w == v) for v in range(n)}
    out_of = {u: sorted(w for (x, w) in edges if x == u) for u in range(n)}
    active = set(seeds)
    failures = {v: 0 for v in range(n)}
    newly = sorted(active)
    log = []
    while newly:
        next_newly = []
        for v in range(n):
            if v in active:
                continue
            attackers = [u for u in in_nbrs[v] if u in newly]
            for u in attackers:
                idx = failures[v] + 1
                outcome = bool(coins[v][idx - 1])
                log.append((u, v, idx, int(outcome)))
                if outcome:
                    active.add(v)
                    next_newly.append(v)
                    break
                failures[v] = idx
        newly = sorted(next_newly)
    return active, log


def naive_exact_spread(n, edges, probs, seeds):
    """Full enumeration over all coin assignments: sum of weight * |final|."""
    slots = [(v, i) for v in range(n) for i in range(len(probs[v]))]
    total = 0.0
    for assignment in itertools.product([False, True], repeat=len(slots)):
        weight = 1.0
        coins = {v: [False] * len(probs[v]) for v in range(n)}
        for (v, i), outcome in zip(slots, assignment):
            coins[v][i] = outcome
            weight *= probs[v][i] if outcome else 1.0 - probs[v][i]
        if weight == 0.0:
            continue
        final, _ = naive_cascade(n, edges, seeds, coins)
        total += weight * len(final)
    return total


def naive_observation_probs(n, edges, probs, seeds):
    """Full enumeration: probability each (v, i) attempt is executed."""
    slots = [(v, i) for v in range(n) for i in range(len(probs[v]))]
    table = {v: [0.0] * len(probs[v]) for v in range(n)}
    for assignment in itertools.product([False, True], repeat=len(slots)):
        weight = 1.0
        coins = {v: [False] * len(probs[v]) for v in range(n)}
        for (v, i), outcome in zip(slots, assignment):
            coins[v][i] = outcome
            weight *= probs[v][i] if outcome else 1.0 - probs[v][i]
        if weight == 0.0:
            continue
        _, log = naive_cascade(n, edges, seeds, coins)
        for (_, v, idx, _) in log:
            table[v][idx - 1] += weight
    return table


def naive_live_edge_reach(n, edges, live, seeds):
    """Independent-cascade determinization: nodes reachable over live edges."""
    adj = {u: [] for u in range(n)}
    for e, (u, v) in enumerate(edges):
        if live[e]:
            adj[u].append(v)
    found = set(seeds)
    frontier = list(seeds)
    while frontier:
        u = frontier.pop()
        for v in adj[u]:
            if v not in found:
                found.add(v)
                frontier.append(v)
    return found


def naive_bfs_reach(n, edges, start):
    """Plain per-node BFS used to cross-check reachability utilities."""
    adj = {u: [] for u in range(n)}
    for u, v in edges:
        adj[u].append(v)
    found = {start}
    frontier = [start]
    while frontier:
        u = frontier.pop()
        for v in adj[u]:
            if v not in found:
                found.add(v)
                frontier.append(v)
    return found
