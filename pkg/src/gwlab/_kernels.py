"""Numba kernels for the hot loops.

Everything here is deliberately branch-simple: kernels consume pre-drawn
uniforms (or pre-built tables) so that randomness stays under the caller's
RngStream control and the compiled code is pure arithmetic. cache=True keeps
recompilation out of repeated test runs.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def survival_iterate(code, n):
    """q_n for the closed-form pgfs: 0=binary, 1=geometric, 2=noncrossing_inner."""
    q = 0.0
    if code == 0:
        for _ in range(n):
            q = 0.5 * (1.0 + q * q)
    elif code == 1:
        for _ in range(n):
            q = 1.0 / (2.0 - q)
    else:
        for _ in range(n):
            q = 4.0 / ((3.0 - q) * (3.0 - q))
    return q


@njit(cache=True)
def sliding_window_min(a, w):
    """out[i] = min(a[i : i + w]) via a monotone deque, O(len(a))."""
    n = a.size
    out = np.empty(n - w + 1, a.dtype)
    dq = np.empty(n, np.int64)
    head, tail = 0, 0
    for i in range(n):
        while tail > head and a[dq[tail - 1]] >= a[i]:
            tail -= 1
        dq[tail] = i
        tail += 1
        if dq[head] <= i - w:
            head += 1
        if i >= w - 1:
            out[i - w + 1] = a[dq[head]]
    return out


# -- tree navigation -----------------------------------------------------------


@njit(cache=True)
def tree_nav(out):
    """parent, depth and branching count M per vertex from lex outdegrees.

    M(v) counts the children of strict ancestors of v that are not ancestors
    themselves: M(child) = M(parent) + out(parent) - 1. The boolean result
    reports whether the outdegree sequence is a single complete tree.
    """
    n = out.size
    parent = np.full(n, -1, np.int64)
    depth = np.zeros(n, np.int64)
    mvals = np.zeros(n, np.int64)
    stack_v = np.empty(n, np.int64)
    stack_rem = np.empty(n, np.int64)
    top = -1
    for i in range(n):
        if i > 0:
            if top < 0:
                return parent, depth, mvals, False
            p = stack_v[top]
            parent[i] = p
            depth[i] = depth[p] + 1
            mvals[i] = mvals[p] + out[p] - 1
            stack_rem[top] -= 1
            if stack_rem[top] == 0:
                top -= 1
        if out[i] > 0:
            top += 1
            stack_v[top] = i
            stack_rem[top] = out[i]
    return parent, depth, mvals, top == -1


@njit(cache=True)
def subtree_sizes(parent):
    n = parent.size
    size = np.ones(n, np.int64)
    for i in range(n - 1, 0, -1):
        size[parent[i]] += size[i]
    return size


@njit(cache=True)
def rev_order(out, size):
    """Vertex order of the mirrored depth-first traversal (children visited
    right to left). Children are pushed left to right so they pop reversed."""
    n = out.size
    order = np.empty(n, np.int64)
    stack = np.empty(n, np.int64)
    stack[0] = 0
    top = 0
    w = 0
    while top >= 0:
        v = stack[top]
        top -= 1
        order[w] = v
        w += 1
        c = v + 1
        for _ in range(out[v]):
            top += 1
            stack[top] = c
            c += size[c]
    return order


@njit(cache=True)
def bfs_vertex_order(out, size):
    """Breadth-first vertex order, children left to right."""
    n = out.size
    order = np.empty(n, np.int64)
    order[0] = 0
    qt = 1
    qh = 0
    while qh < qt:
        v = order[qh]
        qh += 1
        c = v + 1
        for _ in range(out[v]):
            order[qt] = c
            qt += 1
            c += size[c]
    return order


# -- conditioned-tree statistics (experiment hot path) ---------------------------


@njit(cache=True)
def _excursion_stats(inc, shift, kgen):
    """Statistics of the tree decoded from inc rotated by `shift`.

    Single pass: walks the rotated increments, tracking the lex walk maximum
    and the outdegree maximum, and running the depth stack to accumulate
    generation sizes. Returns (width, height, maxdeg, lexmax, z_kgen).
    """
    n = inc.size
    gen = np.zeros(n + 1, np.int64)
    stack_rem = np.empty(n, np.int64)
    stack_dep = np.empty(n, np.int64)
    top = -1
    maxdepth = 0
    maxdeg = 0
    lexmax = 0
    s = 0
    for t in range(n):
        idx = shift + t
        if idx >= n:
            idx -= n
        x = inc[idx]
        s += x
        if s > lexmax:
            lexmax = s
        k = x + 1
        if k > maxdeg:
            maxdeg = k
        if t == 0:
            d = 0
        else:
            d = stack_dep[top] + 1
            stack_rem[top] -= 1
            if stack_rem[top] == 0:
                top -= 1
        gen[d] += 1
        if d > maxdepth:
            maxdepth = d
        if k > 0:
            top += 1
            stack_rem[top] = k
            stack_dep[top] = d
    width = 0
    for d in range(maxdepth + 1):
        if gen[d] > width:
            width = gen[d]
    zk = gen[kgen] if 0 <= kgen <= maxdepth else 0
    return width, maxdepth, maxdeg, lexmax, zk


@njit(cache=True)
def _first_argmin_shift(inc):
    s = 0
    best = np.int64(1) << 62
    besti = 0
    n = inc.size
    for i in range(n):
        s += inc[i]
        if s < best:
            best = s
            besti = i
    shift = besti + 1
    if shift == n:
        shift = 0
    return shift


@njit(cache=True)
def comp_fill_increments(u, n, total, q, pair, inc):
    """Uniform composition of `total` into `q` parts, written as tree-path
    increments into inc (length n). Sequential subset selection: slot s of
    N = total + q - 1 is a bar with probability rem / (N - s).

    pair=0: q == n, inc[i] = part_i - 1.
    pair=1: q == 2 n, inc[i] = part_{2i} + part_{2i+1} - 1.
    """
    N = total + q - 1
    rem = q - 1
    cur = 0
    pi = 0
    for i in range(n):
        inc[i] = 0
    for s in range(N):
        if u[s] * (N - s) < rem:
            if pair == 0:
                inc[pi] = cur - 1
            else:
                inc[pi >> 1] += cur
            pi += 1
            cur = 0
            rem -= 1
        else:
            cur += 1
    if pair == 0:
        inc[pi] = cur - 1
    else:
        inc[pi >> 1] += cur
        for i in range(n):
            inc[i] -= 1


@njit(cache=True)
def comp_tree_stats(u, n, total, q, pair, kgen):
    """Conditioned tree statistics for composition-type laws, one replica.

    Builds the conditioned increments, applies the first-minimum rotation,
    and reads the statistics off the rotated excursion without materializing
    a tree object."""
    inc = np.empty(n, np.int64)
    comp_fill_increments(u, n, total, q, pair, inc)
    shift = _first_argmin_shift(inc)
    return _excursion_stats(inc, shift, kgen)


@njit(cache=True)
def binary_tree_stats(u, n, kgen):
    """Same as comp_tree_stats for the plus-minus-one (binary) law: choose
    (n-1)/2 up-step positions uniformly among n slots."""
    inc = np.empty(n, np.int64)
    rem = (n - 1) // 2
    for s in range(n):
        if u[s] * (n - s) < rem:
            inc[s] = 1
            rem -= 1
        else:
            inc[s] = -1
    shift = _first_argmin_shift(inc)
    return _excursion_stats(inc, shift, kgen)


@njit(cache=True)
def increments_tree_stats(inc, kgen):
    """Statistics from already-conditioned increments (rejection samplers)."""
    shift = _first_argmin_shift(inc)
    return _excursion_stats(inc, shift, kgen)


@njit(cache=True)
def comp_max_part(u, total, q):
    """Max part of a uniform composition (= max outdegree of the forest whose
    conditioned increments these are, plus nothing: parts are outdegrees)."""
    N = total + q - 1
    rem = q - 1
    cur = 0
    best = 0
    for s in range(N):
        if u[s] * (N - s) < rem:
            if cur > best:
                best = cur
            cur = 0
            rem -= 1
        else:
            cur += 1
    if cur > best:
        best = cur
    return best


# -- heavy-tail (alias table) kernels -------------------------------------------


@njit(cache=True)
def alias_fill_rows(u, batch, n, prob, alias, ptail, draws, rowsums, tailcount):
    """Fill batch x n offspring draws from the alias table.

    One uniform per draw: with probability ptail the draw belongs to the far
    tail beyond the table and is left as the marker -1 for the caller to
    resolve exactly; otherwise the rescaled uniform picks the alias column
    and decides between it and its alias."""
    K = prob.size
    c = 0
    for b in range(batch):
        s = 0
        tc = 0
        for t in range(n):
            uu = u[c]
            c += 1
            if uu < ptail:
                draws[b, t] = -1
                tc += 1
            else:
                x = (uu - ptail) / (1.0 - ptail) * K
                j = np.int64(x)
                if j >= K:
                    j = K - 1
                if x - j < prob[j]:
                    v = j
                else:
                    v = alias[j]
                draws[b, t] = v
                s += v
        rowsums[b] = s
        tailcount[b] = tc


@njit(cache=True)
def alias_hit_count(u, reps, n, target, prob, alias, ptail):
    """Count replicas whose n offspring draws sum exactly to `target`.

    Tail draws (probability ptail each) always exceed any target below the
    table size, so they are counted as an automatic miss without resolving
    the exact value."""
    K = prob.size
    hits = 0
    c = 0
    for r in range(reps):
        s = 0
        dead = False
        for t in range(n):
            uu = u[c]
            c += 1
            if uu < ptail:
                dead = True
            elif not dead:
                x = (uu - ptail) / (1.0 - ptail) * K
                j = np.int64(x)
                if j >= K:
                    j = K - 1
                if x - j < prob[j]:
                    s += j
                else:
                    s += alias[j]
        if not dead and s == target:
            hits += 1
    return hits
