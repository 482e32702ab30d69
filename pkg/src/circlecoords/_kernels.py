"""Compiled inner loops for Rips construction and cohomology reduction."""

import heapq

import numpy as np
from numba import njit


@njit(cache=True)
def count_triangles(dist, scale):
    n = dist.shape[0]
    total = 0
    nbrs = np.empty(n, dtype=np.int64)
    for u in range(n):
        m = 0
        for v in range(u + 1, n):
            if dist[u, v] <= scale:
                nbrs[m] = v
                m += 1
        for a in range(m):
            v = nbrs[a]
            for b in range(a + 1, m):
                if dist[v, nbrs[b]] <= scale:
                    total += 1
    return total


@njit(cache=True)
def enumerate_triangles(dist, scale, edge_index, count):
    """Triangles (u < v < w) in lexicographic order, with their edge ids.

    Edge columns are ordered (vw, uw, uv), matching the coboundary signs
    (+1, -1, +1).
    """
    n = dist.shape[0]
    tris = np.empty((count, 3), dtype=np.int64)
    tri_edges = np.empty((count, 3), dtype=np.int64)
    values = np.empty(count, dtype=np.float64)
    nbrs = np.empty(n, dtype=np.int64)
    pos = 0
    for u in range(n):
        m = 0
        for v in range(u + 1, n):
            if dist[u, v] <= scale:
                nbrs[m] = v
                m += 1
        for a in range(m):
            v = nbrs[a]
            for b in range(a + 1, m):
                w = nbrs[b]
                if dist[v, w] <= scale:
                    tris[pos, 0] = u
                    tris[pos, 1] = v
                    tris[pos, 2] = w
                    tri_edges[pos, 0] = edge_index[v, w]
                    tri_edges[pos, 1] = edge_index[u, w]
                    tri_edges[pos, 2] = edge_index[u, v]
                    values[pos] = max(dist[u, v], dist[u, w], dist[v, w])
                    pos += 1
    return tris, tri_edges, values


@njit(cache=True)
def coboundary_csr(n_edges, tri_edges):
    """Counting sort of triangle cofacets per edge, ascending triangle id."""
    n_tri = tri_edges.shape[0]
    ptr = np.zeros(n_edges + 1, dtype=np.int64)
    for t in range(n_tri):
        for j in range(3):
            ptr[tri_edges[t, j] + 1] += 1
    for e in range(n_edges):
        ptr[e + 1] += ptr[e]
    fill = ptr[:-1].copy()
    cof = np.empty(3 * n_tri, dtype=np.int64)
    sign = np.empty(3 * n_tri, dtype=np.int64)
    for t in range(n_tri):
        for j in range(3):
            e = tri_edges[t, j]
            cof[fill[e]] = t
            sign[fill[e]] = 1 if j != 1 else -1
            fill[e] += 1
    return ptr, cof, sign


@njit(cache=True)
def _inverse_table(p):
    inv = np.zeros(p, dtype=np.int64)
    for a in range(1, p):
        for b in range(1, p):
            if (a * b) % p == 1:
                inv[a] = b
                break
    return inv


@njit(cache=True)
def reduce_coboundary(n_edges, n_tri, ptr, cof, sign, cleared, p):
    """Reduce the edge-to-triangle coboundary matrix over Z/p.

    Columns are edges in decreasing filtration order; the pivot of a column
    is its oldest (smallest index) triangle.  Returns, per edge, the pivot
    triangle (-1: zero column, -2: cleared) and the reduction matrix V in
    CSR form, whose column e is the cocycle representative of e's class.
    """
    inv = _inverse_table(p)
    pivot_col = np.full(n_tri, -1, dtype=np.int64)
    pivot_coef = np.zeros(n_edges, dtype=np.int64)
    pair = np.full(n_edges, -2, dtype=np.int64)

    v_start = np.zeros(n_edges, dtype=np.int64)
    v_len = np.zeros(n_edges, dtype=np.int64)
    cap = max(16, 2 * n_edges)
    v_idx = np.empty(cap, dtype=np.int64)
    v_val = np.empty(cap, dtype=np.int64)
    used = 0

    acc = np.zeros(n_tri, dtype=np.int64)
    vacc = np.zeros(n_edges, dtype=np.int64)
    touched = np.empty(max(16, n_tri), dtype=np.int64)

    for e in range(n_edges - 1, -1, -1):
        if cleared[e]:
            continue
        lo, hi = ptr[e], ptr[e + 1]
        if lo == hi or pivot_col[cof[lo]] == -1:
            # emergent: the oldest cofacet is unclaimed, nothing to add
            if used + 1 > cap:
                cap *= 2
                v_idx = _grow(v_idx, cap)
                v_val = _grow(v_val, cap)
            v_start[e] = used
            v_len[e] = 1
            v_idx[used] = e
            v_val[used] = 1
            used += 1
            if lo == hi:
                pair[e] = -1
            else:
                t = cof[lo]
                pair[e] = t
                pivot_col[t] = e
                pivot_coef[e] = sign[lo] % p
            continue

        heap = [np.int64(0)]
        heap.pop()
        n_touched = 0
        vlist = [np.int64(e)]
        vacc[e] = 1
        for q in range(lo, hi):
            t = cof[q]
            acc[t] = (acc[t] + sign[q]) % p
            heapq.heappush(heap, t)
            if n_touched >= touched.shape[0]:
                touched = _grow(touched, 2 * touched.shape[0])
            touched[n_touched] = t
            n_touched += 1

        piv = -1
        while True:
            piv = -1
            while len(heap) > 0:
                t = heap[0]
                if acc[t] != 0:
                    piv = t
                    break
                heapq.heappop(heap)
            if piv == -1:
                break
            j = pivot_col[piv]
            if j == -1:
                break
            factor = (p - (acc[piv] * inv[pivot_coef[j]]) % p) % p
            for a in range(v_start[j], v_start[j] + v_len[j]):
                ee = v_idx[a]
                c = (factor * v_val[a]) % p
                if vacc[ee] == 0:
                    vlist.append(ee)
                vacc[ee] = (vacc[ee] + c) % p
                for q in range(ptr[ee], ptr[ee + 1]):
                    t = cof[q]
                    acc[t] = (acc[t] + c * sign[q]) % p
                    if acc[t] != 0:
                        heapq.heappush(heap, t)
                    if n_touched >= touched.shape[0]:
                        touched = _grow(touched, 2 * touched.shape[0])
                    touched[n_touched] = t
                    n_touched += 1

        if piv == -1:
            pair[e] = -1
        else:
            pair[e] = piv
            pivot_col[piv] = e
            pivot_coef[e] = acc[piv]

        if used + len(vlist) > cap:
            while used + len(vlist) > cap:
                cap *= 2
            v_idx = _grow(v_idx, cap)
            v_val = _grow(v_val, cap)
        v_start[e] = used
        # vlist may repeat an edge whose entry cancelled and came back;
        # zeroing vacc on first write drops the repeats
        for ee in vlist:
            if vacc[ee] != 0:
                v_idx[used] = ee
                v_val[used] = vacc[ee]
                used += 1
                vacc[ee] = 0
        v_len[e] = used - v_start[e]
        for a in range(n_touched):
            acc[touched[a]] = 0

    return pair, v_start, v_len, v_idx[:used].copy(), v_val[:used].copy()


@njit(cache=True)
def _grow(arr, size):
    out = np.empty(size, dtype=arr.dtype)
    out[: arr.shape[0]] = arr
    return out


@njit(cache=True)
def _find(parent, a):
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


@njit(cache=True)
def spanning_forest_mask(n_vertices, edges):
    """Kruskal in the given (filtration) order; True for edges that merge components."""
    parent = np.arange(n_vertices)
    mask = np.zeros(edges.shape[0], dtype=np.bool_)
    for e in range(edges.shape[0]):
        a = _find(parent, edges[e, 0])
        b = _find(parent, edges[e, 1])
        if a != b:
            parent[max(a, b)] = min(a, b)
            mask[e] = True
    return mask
