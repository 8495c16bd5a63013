"""Numeric inner loops.

Every function here operates on plain numpy arrays so it can be compiled by
numba. Where a vectorised numpy formulation is materially faster than
interpreted loops, a separate numpy variant is selected when numba is off.
"""
import numpy as np

from ._accel import NUMBA_ENABLED, jit

# status codes returned by transport_simplex
OPTIMAL = 0
ITERATION_LIMIT = 1


# ---------------------------------------------------------------------------
# transportation simplex
# ---------------------------------------------------------------------------

@jit
def initial_basis(a, b, C):
    """Matrix-minimum starting tree.

    Cells are visited by increasing cost (zero-cost pairs first). Each
    allocation retires exactly one row or column, the last one retires both,
    so the m + n - 1 chosen cells always form a spanning tree.
    """
    m, n = C.shape
    order = np.argsort(C.ravel(), kind="mergesort")
    s = a.copy()
    d = b.copy()
    row_done = np.zeros(m, dtype=np.bool_)
    col_done = np.zeros(n, dtype=np.bool_)
    rows_left = m
    cols_left = n
    nb = m + n - 1
    br = np.empty(nb, dtype=np.int64)
    bc = np.empty(nb, dtype=np.int64)
    bx = np.empty(nb, dtype=np.float64)
    k = 0
    for idx in order:
        i = idx // n
        j = idx % n
        if row_done[i] or col_done[j]:
            continue
        if rows_left == 1 and cols_left == 1:
            x = s[i]
            row_done[i] = True
            col_done[j] = True
            rows_left = 0
            cols_left = 0
        elif cols_left == 1 or (rows_left > 1 and s[i] <= d[j]):
            x = s[i]
            d[j] = max(d[j] - x, 0.0)
            row_done[i] = True
            rows_left -= 1
        else:
            x = d[j]
            s[i] = max(s[i] - x, 0.0)
            col_done[j] = True
            cols_left -= 1
        br[k] = i
        bc[k] = j
        bx[k] = x
        k += 1
        if rows_left == 0:
            break
    return br, bc, bx


@jit
def tree_potentials(br, bc, C, pot, parent, parent_edge, depth):
    """Node potentials, parents and depths of the basis tree rooted at row 0.

    Rows are nodes ``0..m-1`` and columns ``m..m+n-1``. Potentials satisfy
    ``u_i + v_j = C[i, j]`` on every tree edge.
    """
    m, n = C.shape
    N = m + n
    nb = br.shape[0]
    deg = np.zeros(N + 1, dtype=np.int64)
    for e in range(nb):
        deg[br[e] + 1] += 1
        deg[m + bc[e] + 1] += 1
    start = np.cumsum(deg)
    fill = start[:-1].copy()
    nbr = np.empty(2 * nb, dtype=np.int64)
    nedge = np.empty(2 * nb, dtype=np.int64)
    for e in range(nb):
        r = br[e]
        c = m + bc[e]
        nbr[fill[r]] = c
        nedge[fill[r]] = e
        fill[r] += 1
        nbr[fill[c]] = r
        nedge[fill[c]] = e
        fill[c] += 1

    queue = np.empty(N, dtype=np.int64)
    seen = np.zeros(N, dtype=np.bool_)
    queue[0] = 0
    seen[0] = True
    pot[0] = 0.0
    parent[0] = -1
    parent_edge[0] = -1
    depth[0] = 0
    head = 0
    tail = 1
    while head < tail:
        x = queue[head]
        head += 1
        for p in range(start[x], start[x + 1]):
            y = nbr[p]
            if seen[y]:
                continue
            e = nedge[p]
            seen[y] = True
            pot[y] = C[br[e], bc[e]] - pot[x]
            parent[y] = x
            parent_edge[y] = e
            depth[y] = depth[x] + 1
            queue[tail] = y
            tail += 1
    return tail


if NUMBA_ENABLED:
    @jit
    def most_negative_reduced_cost(C, u, v):
        m, n = C.shape
        best = 0.0
        bi = -1
        bj = -1
        for i in range(m):
            ui = u[i]
            for j in range(n):
                r = C[i, j] - ui - v[j]
                if r < best:
                    best = r
                    bi = i
                    bj = j
        return bi, bj, best
else:
    def most_negative_reduced_cost(C, u, v):
        R = C - u[:, None] - v[None, :]
        k = int(np.argmin(R))
        i, j = divmod(k, C.shape[1])
        best = R[i, j]
        if best < 0.0:
            return i, j, best
        return -1, -1, 0.0


@jit
def transport_simplex(a, b, C, tol, max_iter):
    """Exact min-cost transport between supplies ``a`` and demands ``b``.

    Returns ``(br, bc, bx, u, v, status, iterations)``: the final basis
    cells with their flows and the row/column dual potentials.
    """
    m, n = C.shape
    br, bc, bx = initial_basis(a, b, C)
    N = m + n
    pot = np.zeros(N)
    parent = np.empty(N, dtype=np.int64)
    parent_edge = np.empty(N, dtype=np.int64)
    depth = np.empty(N, dtype=np.int64)
    path_a = np.empty(N, dtype=np.int64)
    path_b = np.empty(N, dtype=np.int64)
    status = ITERATION_LIMIT
    it = 0
    while it < max_iter:
        tree_potentials(br, bc, C, pot, parent, parent_edge, depth)
        ei, ej, red = most_negative_reduced_cost(C, pot[:m], pot[m:])
        if ei < 0 or red >= -tol:
            status = OPTIMAL
            break
        it += 1
        # tree path between row ei and column ej
        x = ei
        y = m + ej
        na = 0
        nbp = 0
        while depth[x] > depth[y]:
            path_a[na] = parent_edge[x]
            na += 1
            x = parent[x]
        while depth[y] > depth[x]:
            path_b[nbp] = parent_edge[y]
            nbp += 1
            y = parent[y]
        while x != y:
            path_a[na] = parent_edge[x]
            na += 1
            x = parent[x]
            path_b[nbp] = parent_edge[y]
            nbp += 1
            y = parent[y]
        # cycle from the apex: path_a reversed (down to ei), entering cell,
        # then path_b (up from ej). Entering sits at parity 0; path_b[k] at
        # k + 1 and path_a[k] at nbp + na - k, odd parities shrink.
        theta = np.inf
        leave = -1
        for t in range(na - 1, -1, -1):
            if (nbp + na - t) % 2 == 1:
                e = path_a[t]
                if bx[e] <= theta:
                    theta = bx[e]
                    leave = e
        for t in range(nbp):
            if (t + 1) % 2 == 1:
                e = path_b[t]
                if bx[e] <= theta:
                    theta = bx[e]
                    leave = e
        for t in range(nbp):
            e = path_b[t]
            if (t + 1) % 2 == 1:
                bx[e] = max(bx[e] - theta, 0.0)
            else:
                bx[e] += theta
        for t in range(na):
            e = path_a[t]
            if (nbp + na - t) % 2 == 1:
                bx[e] = max(bx[e] - theta, 0.0)
            else:
                bx[e] += theta
        br[leave] = ei
        bc[leave] = ej
        bx[leave] = theta
    if status != OPTIMAL:
        tree_potentials(br, bc, C, pot, parent, parent_edge, depth)
    return br, bc, bx, pot[:m].copy(), pot[m:].copy(), status, it


# ---------------------------------------------------------------------------
# robust-minimisation primal: per-source descent chains
# ---------------------------------------------------------------------------

@jit
def descent_chains(C, V):
    """Lower convex hull of the points ``(C[i, j], V[j])`` for every source i.

    Only the descending part is kept: it starts at the cheapest point and
    ends at the first point of minimal payoff. Returns CSR-style arrays
    ``(offsets, vertices)``; source i owns ``vertices[offsets[i]:offsets[i+1]]``.
    """
    n_src, m = C.shape
    offsets = np.zeros(n_src + 1, dtype=np.int64)
    vertices = np.empty(n_src * m, dtype=np.int64)
    hull = np.empty(m, dtype=np.int64)
    by_v = np.argsort(V, kind="mergesort")
    total = 0
    for i in range(n_src):
        row = C[i]
        order = by_v[np.argsort(row[by_v], kind="mergesort")]
        h = 0
        for p in order:
            if h > 0 and row[p] == row[hull[h - 1]]:
                continue
            while h >= 2:
                o = hull[h - 2]
                q = hull[h - 1]
                cross = (row[q] - row[o]) * (V[p] - V[o]) - (V[q] - V[o]) * (row[p] - row[o])
                if cross <= 0.0:
                    h -= 1
                else:
                    break
            hull[h] = p
            h += 1
        # keep up to the first vertex of minimal payoff
        kmin = 0
        for k in range(1, h):
            if V[hull[k]] < V[hull[kmin]]:
                kmin = k
        for k in range(kmin + 1):
            vertices[total + k] = hull[k]
        total += kmin + 1
        offsets[i + 1] = total
    return offsets, vertices[:total].copy()


# ---------------------------------------------------------------------------
# robust-minimisation dual: lambda-c transform and its breakpoints
# ---------------------------------------------------------------------------

if NUMBA_ENABLED:
    @jit
    def c_transform(C, V, lam):
        """``min_j V[j] + lam * C[i, j]`` for every row i."""
        n_src, m = C.shape
        out = np.empty(n_src)
        for i in range(n_src):
            best = np.inf
            for j in range(m):
                val = V[j] + lam * C[i, j]
                if val < best:
                    best = val
            out[i] = best
        return out

    @jit
    def envelope_breakpoints(C, V, lam_max):
        """Kinks in ``(0, lam_max]`` of every row's lower envelope of lines.

        Row i has lines ``lam -> V[j] + lam * C[i, j]``. Starting from the
        minimal line at ``lam = 0`` the walk repeatedly jumps to the line of
        smaller slope that crosses first.
        """
        n_src, m = C.shape
        out = np.empty(n_src * m)
        cnt = 0
        for i in range(n_src):
            cur = 0
            for j in range(1, m):
                if V[j] < V[cur] or (V[j] == V[cur] and C[i, j] < C[i, cur]):
                    cur = j
            lam = 0.0
            while True:
                best = np.inf
                nxt = -1
                for j in range(m):
                    if C[i, j] < C[i, cur]:
                        t = (V[j] - V[cur]) / (C[i, cur] - C[i, j])
                        if t < best or (t == best and C[i, j] < C[i, nxt]):
                            best = t
                            nxt = j
                if nxt < 0 or best > lam_max:
                    break
                if best < lam:
                    best = lam
                if best > 0.0:
                    out[cnt] = best
                    cnt += 1
                cur = nxt
                lam = best
        return out[:cnt].copy()
else:
    def c_transform(C, V, lam):
        """``min_j V[j] + lam * C[i, j]`` for every row i."""
        return (V[None, :] + lam * C).min(axis=1)

    def envelope_breakpoints(C, V, lam_max):
        """Kinks in ``(0, lam_max]`` of every row's lower envelope of lines."""
        out = []
        for i in range(C.shape[0]):
            row = C[i]
            cur = int(np.lexsort((row, V))[0])
            lam = 0.0
            while True:
                cand = np.flatnonzero(row < row[cur])
                if cand.size == 0:
                    break
                t = (V[cand] - V[cur]) / (row[cur] - row[cand])
                k = np.lexsort((row[cand], t))[0]
                best = t[k]
                if best > lam_max:
                    break
                best = max(best, lam)
                if best > 0.0:
                    out.append(best)
                cur = int(cand[k])
                lam = best
        return np.asarray(out, dtype=np.float64)
