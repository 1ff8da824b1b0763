"""Hot numeric kernels: masked multi-source Dijkstra and connected components.

Two interchangeable backends operate on the same CSR arrays:

* a numba ``@njit`` backend (default when numba imports cleanly), and
* a pure Python/numpy fallback using heapq.

Set ``PLANROUTE_KERNELS=python`` to force the fallback or
``PLANROUTE_KERNELS=numba`` to require the jit path. ``bench/bench_kernels.py``
compares the two.

All distances are int64 numerators on the graph's weight grid, so every
comparison is exact. Ties break lexicographically on (distance, last-hop id):
a relaxation at equal distance wins only with a smaller predecessor.
"""
from __future__ import annotations

import heapq
import os

import numpy as np

UNREACHED = np.int64(-1)

_CHOICE = os.environ.get("PLANROUTE_KERNELS", "auto").lower()
if _CHOICE not in ("auto", "numba", "python"):
    raise ValueError(f"PLANROUTE_KERNELS must be auto|numba|python, got {_CHOICE!r}")

HAS_NUMBA = False
if _CHOICE in ("auto", "numba"):
    try:
        from numba import njit

        HAS_NUMBA = True
    except ImportError:
        if _CHOICE == "numba":
            raise
        HAS_NUMBA = False


def _dijkstra_py(indptr, nbr, wt, src_v, src_d, mask, cutoff):
    n = len(indptr) - 1
    dist = np.full(n, -1, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int32)
    root = np.full(n, -1, dtype=np.int32)
    done = np.zeros(n, dtype=bool)
    heap = []
    for i in range(len(src_v)):
        v = int(src_v[i])
        d = int(src_d[i])
        if not mask[v]:
            continue
        if cutoff >= 0 and d > cutoff:
            continue
        if dist[v] == -1 or d < dist[v]:
            dist[v] = d
            root[v] = v
            parent[v] = -1
            heapq.heappush(heap, (d, v))
    while heap:
        d, v = heapq.heappop(heap)
        if done[v] or d != dist[v]:
            continue
        done[v] = True
        for k in range(int(indptr[v]), int(indptr[v + 1])):
            w = int(nbr[k])
            if not mask[w] or done[w]:
                continue
            nd = d + int(wt[k])
            if cutoff >= 0 and nd > cutoff:
                continue
            if dist[w] == -1 or nd < dist[w] or (nd == dist[w] and v < parent[w]):
                dist[w] = nd
                parent[w] = v
                root[w] = root[v]
                heapq.heappush(heap, (nd, w))
    return dist, parent, root


def _cc_py(indptr, nbr, mask):
    n = len(indptr) - 1
    label = np.full(n, -1, dtype=np.int32)
    nxt = 0
    for s in range(n):
        if not mask[s] or label[s] >= 0:
            continue
        label[s] = nxt
        stack = [s]
        while stack:
            v = stack.pop()
            for k in range(int(indptr[v]), int(indptr[v + 1])):
                w = int(nbr[k])
                if mask[w] and label[w] < 0:
                    label[w] = nxt
                    stack.append(w)
        nxt += 1
    return label, nxt


if HAS_NUMBA:

    @njit(cache=True, nogil=True)
    def _heap_push(hd, hv, size, d, v):  # pragma: no cover
        i = size
        hd[i] = d
        hv[i] = v
        while i > 0:
            p = (i - 1) >> 1
            if hd[p] > hd[i] or (hd[p] == hd[i] and hv[p] > hv[i]):
                hd[p], hd[i] = hd[i], hd[p]
                hv[p], hv[i] = hv[i], hv[p]
                i = p
            else:
                break
        return size + 1

    @njit(cache=True, nogil=True)
    def _heap_pop(hd, hv, size):  # pragma: no cover
        d = hd[0]
        v = hv[0]
        size -= 1
        hd[0] = hd[size]
        hv[0] = hv[size]
        i = 0
        while True:
            l = 2 * i + 1
            r = l + 1
            best = i
            if l < size and (hd[l] < hd[best] or (hd[l] == hd[best] and hv[l] < hv[best])):
                best = l
            if r < size and (hd[r] < hd[best] or (hd[r] == hd[best] and hv[r] < hv[best])):
                best = r
            if best == i:
                break
            hd[best], hd[i] = hd[i], hd[best]
            hv[best], hv[i] = hv[i], hv[best]
            i = best
        return d, v, size

    @njit(cache=True, nogil=True)
    def _dijkstra_nb(indptr, nbr, wt, src_v, src_d, mask, cutoff):  # pragma: no cover
        n = len(indptr) - 1
        dist = np.full(n, -1, dtype=np.int64)
        parent = np.full(n, -1, dtype=np.int32)
        root = np.full(n, -1, dtype=np.int32)
        done = np.zeros(n, dtype=np.uint8)
        # each directed edge and each source pushes at most once
        cap = len(nbr) + len(src_v) + 16
        hd = np.empty(cap, dtype=np.int64)
        hv = np.empty(cap, dtype=np.int32)
        size = 0
        for i in range(len(src_v)):
            v = src_v[i]
            d = src_d[i]
            if mask[v] == 0:
                continue
            if cutoff >= 0 and d > cutoff:
                continue
            if dist[v] == -1 or d < dist[v]:
                dist[v] = d
                root[v] = v
                parent[v] = -1
                size = _heap_push(hd, hv, size, d, v)
        while size > 0:
            d, v, size = _heap_pop(hd, hv, size)
            if done[v] == 1 or d != dist[v]:
                continue
            done[v] = 1
            for k in range(indptr[v], indptr[v + 1]):
                w = nbr[k]
                if mask[w] == 0 or done[w] == 1:
                    continue
                nd = d + wt[k]
                if cutoff >= 0 and nd > cutoff:
                    continue
                if dist[w] == -1 or nd < dist[w] or (nd == dist[w] and v < parent[w]):
                    dist[w] = nd
                    parent[w] = v
                    root[w] = root[v]
                    size = _heap_push(hd, hv, size, nd, w)
        return dist, parent, root

    @njit(cache=True, nogil=True)
    def _cc_nb(indptr, nbr, mask):  # pragma: no cover
        n = len(indptr) - 1
        label = np.full(n, -1, dtype=np.int32)
        stack = np.empty(n, dtype=np.int32)
        nxt = 0
        for s in range(n):
            if mask[s] == 0 or label[s] >= 0:
                continue
            label[s] = nxt
            top = 0
            stack[top] = s
            top += 1
            while top > 0:
                top -= 1
                v = stack[top]
                for k in range(indptr[v], indptr[v + 1]):
                    w = nbr[k]
                    if mask[w] == 1 and label[w] < 0:
                        label[w] = nxt
                        stack[top] = w
                        top += 1
            nxt += 1
        return label, nxt


def backend_name() -> str:
    if _CHOICE == "python":
        return "python"
    return "numba" if HAS_NUMBA else "python"


def dijkstra(indptr, nbr, wt, src_v, src_d, mask, cutoff=-1):
    """Masked multi-source Dijkstra.

    src_v / src_d are parallel arrays of seed vertices and their initial
    distances (a virtual super-source is expressed by seeding each attached
    vertex with its virtual-edge weight). cutoff >= 0 stops expansion past
    that distance. Returns (dist, parent, root); -1 means unreached.
    """
    src_v = np.ascontiguousarray(src_v, dtype=np.int32)
    src_d = np.ascontiguousarray(src_d, dtype=np.int64)
    m8 = np.ascontiguousarray(mask, dtype=np.uint8)
    if backend_name() == "numba":
        return _dijkstra_nb(indptr, nbr, wt, src_v, src_d, m8, np.int64(cutoff))
    return _dijkstra_py(indptr, nbr, wt, src_v, src_d, m8, int(cutoff))


def connected_components(indptr, nbr, mask):
    """Labels masked vertices 0..k-1 by component; -1 outside. Returns (label, k)."""
    m8 = np.ascontiguousarray(mask, dtype=np.uint8)
    if backend_name() == "numba":
        return _cc_nb(indptr, nbr, m8)
    return _cc_py(indptr, nbr, m8)
