# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled permutation kernels.  Contract identical to pure.py."""

from cpython.bytes cimport PyBytes_FromStringAndSize


def identity(int n):
    cdef bytearray out = bytearray(n)
    cdef int i
    for i in range(n):
        out[i] = i
    return bytes(out)


cdef bytes _compose(const unsigned char[:] a, const unsigned char[:] b):
    cdef Py_ssize_t n = b.shape[0]
    cdef bytearray out = bytearray(n)
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = a[b[i]]
    return bytes(out)


def compose(bytes a, bytes b):
    """a after b: (a*b)[i] = a[b[i]]."""
    return _compose(a, b)


def invert(bytes a):
    cdef Py_ssize_t n = len(a)
    cdef bytearray out = bytearray(n)
    cdef const unsigned char *p = a
    cdef Py_ssize_t i
    for i in range(n):
        out[p[i]] = i
    return bytes(out)


def close(generators, int n, long cap):
    """Multiplicative closure; see pure.close."""
    cdef list gens = [bytes(g) for g in generators]
    for g in gens:
        if len(<bytes> g) != n:
            raise ValueError("generator length %d does not match n=%d" % (len(<bytes> g), n))
    cdef set els = {identity(n)}
    els.update(gens)
    if len(els) > cap:
        return sorted(els), True
    cdef list boundary = sorted(els)
    cdef list fresh
    cdef bytes a, b, c
    while boundary:
        fresh = []
        for a in gens:
            for b in boundary:
                c = _compose(a, b)
                if c not in els:
                    els.add(c)
                    if len(els) > cap:
                        return sorted(els), True
                    fresh.append(c)
        boundary = fresh
    return sorted(els), False


def closed_walk_perms(int n_vertices, int base, int max_steps, edges, int fiber):
    """Closed-walk transport set; see pure.closed_walk_perms."""
    cdef list out_of = [[] for _ in range(n_vertices)]
    cdef int a, b
    for a, b, t in edges:
        out_of[a].append((b, bytes(t)))
    cdef bytes ident = identity(fiber)
    cdef set seen = {(base, ident)}
    cdef set collected = {ident}
    cdef list frontier = [(base, ident)]
    cdef list nxt
    cdef int v, w, step
    cdef bytes acc, acc2, t2
    for step in range(max_steps):
        nxt = []
        for v, acc in frontier:
            for w, t2 in out_of[v]:
                acc2 = _compose(acc, t2)
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
