"""Pure-Python permutation kernels.

A permutation on range(n) is a length-n bytes object: p[i] is the image
of i.  bytes sort lexicographically, which is the canonical element order
used everywhere downstream.  The compiled twin (_fast.pyx) implements the
same contract.
"""


def identity(n: int) -> bytes:
    return bytes(range(n))


def compose(a: bytes, b: bytes) -> bytes:
    """a after b: (a*b)[i] = a[b[i]]."""
    return bytes(a[x] for x in b)


def invert(a: bytes) -> bytes:
    out = bytearray(len(a))
    for i, x in enumerate(a):
        out[x] = i
    return bytes(out)


def close(generators, n: int, cap: int):
    """Multiplicative closure of a generator set.

    Returns (elements, capped): elements sorted, capped true when the cap
    was hit before the closure stabilised.  The identity is always included;
    finiteness makes the closed set a group.
    """
    gens = [bytes(g) for g in generators]
    for g in gens:
        if len(g) != n:
            raise ValueError("generator length %d does not match n=%d" % (len(g), n))
    els = {identity(n)}
    els.update(gens)
    if len(els) > cap:
        return sorted(els), True
    boundary = sorted(els)
    while boundary:
        fresh = []
        for a in gens:
            for b in boundary:
                c = compose(a, b)
                if c not in els:
                    els.add(c)
                    if len(els) > cap:
                        return sorted(els), True
                    fresh.append(c)
        boundary = fresh
    return sorted(els), False


def closed_walk_perms(n_vertices: int, base: int, max_steps: int, edges, fiber: int):
    """Transports realised by closed walks at base with at most max_steps steps.

    edges: iterable of (a, b, t) directed entries where t carries the fiber
    over b to the fiber over a.  Walking a step a->b extends the accumulated
    transport acc (fiber over a -> fiber over base) to acc*t.  BFS over
    (vertex, acc) states; each state is expanded once, which is exact for
    the <= max_steps reachability set.
    """
    out_of = [[] for _ in range(n_vertices)]
    for a, b, t in edges:
        out_of[a].append((b, bytes(t)))
    ident = identity(fiber)
    seen = {(base, ident)}
    collected = {ident}
    frontier = [(base, ident)]
    for _ in range(max_steps):
        nxt = []
        for v, acc in frontier:
            for w, t in out_of[v]:
                acc2 = compose(acc, t)
                state = (w, acc2)
                if state in seen:
                    continue
                seen.add(state)
                nxt.append(state)
                if w == base:
                    collected.add(acc2)
        frontier = nxt
        if not frontier:
            break
    return sorted(collected)
