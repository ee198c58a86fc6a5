"""Dart-based 2d-regular multigraphs from permutations, with cycle
enumeration, word classification, non-backtracking walk counts, tangles and
pre-cycles.

Darts: for generator i (0-based) and vertex x, the forward dart
``2*(i*n + x - 1)`` runs x -> pi_i(x) and its reversal partner (id ^ 1) runs
back.  A loop contributes two darts that are mutual reversals, so walking a
loop twice in the same orientation is non-backtracking and the trace identity
holds exactly on the permutation model.
"""

from __future__ import annotations

import dataclasses
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from rrgfield.tower import Permutation
from rrgfield.words import Word, WordClassTable, canonical


class SignMismatch(ValueError):
    """Pre-cycle word whose first and last letters carry different signs."""


@dataclasses.dataclass(eq=False)
class MultiGraph:
    """Labeled directed 2d-regular multigraph snapshot built from d
    permutations of common size n (loops allowed, multiple edges allowed)."""

    n: int
    d: int
    maps: list[np.ndarray]  # maps[i][x] = pi_i(x), 1-based

    @cached_property
    def invs(self) -> list[np.ndarray]:
        out = []
        for m in self.maps:
            inv = np.zeros_like(m)
            inv[m] = np.arange(len(m))
            out.append(inv)
        return out

    @property
    def ndarts(self) -> int:
        return 2 * self.d * self.n

    def dart_tail(self, e: int) -> int:
        i, rev = divmod(e, 2)
        gen, x0 = divmod(i, self.n)
        x = x0 + 1
        return int(self.maps[gen][x]) if rev else x

    def dart_head(self, e: int) -> int:
        return self.dart_tail(e ^ 1)

    def dart_label(self, e: int) -> int:
        """Letter code of a dart: 2*gen for forward, 2*gen+1 for reversal."""
        i, rev = divmod(e, 2)
        gen = i // self.n
        return 2 * gen + rev

    @cached_property
    def heads(self) -> np.ndarray:
        h = np.empty(self.ndarts, dtype=np.int64)
        n = self.n
        for g, m in enumerate(self.maps):
            h[2 * g * n : 2 * (g + 1) * n : 2] = m[1:]
            h[2 * g * n + 1 : 2 * (g + 1) * n : 2] = np.arange(1, n + 1)
        return h

    @cached_property
    def tails(self) -> np.ndarray:
        return self.heads[np.arange(self.ndarts) ^ 1]

    @cached_property
    def out_darts(self) -> list[np.ndarray]:
        """out_darts[x] = dart ids with tail x (2d of them), ascending."""
        order = np.argsort(self.tails, kind="stable")
        return [np.empty(0, dtype=np.int64)] + list(
            np.split(order, np.arange(2 * self.d, self.ndarts, 2 * self.d))
        )

    def adjacency(self) -> np.ndarray:
        """Dense symmetric adjacency; each loop counts 2 on the diagonal."""
        a = np.zeros((self.n, self.n), dtype=np.int64)
        idx = np.arange(self.n)
        for m in self.maps:
            np.add.at(a, (idx, m[1:] - 1), 1)
        return a + a.T

    def nb_matrix(self) -> sp.csr_matrix:
        """Non-backtracking dart operator B: B[e, f] = 1 iff head(e) = tail(f)
        and f != reversal(e)."""
        nd = self.ndarts
        deg = 2 * self.d
        rows = np.repeat(np.arange(nd), deg)
        cols = np.concatenate([self.out_darts[int(h)] for h in self.heads])
        keep = cols != (rows ^ 1)
        data = np.ones(keep.sum(), dtype=np.float64)
        return sp.csr_matrix((data, (rows[keep], cols[keep])), shape=(nd, nd))


def build_graph(perms: list[Permutation]) -> MultiGraph:
    """Superimpose d permutation digraphs; all adjacency row sums equal 2d."""
    if not perms:
        raise ValueError("need at least one permutation")
    n = perms[0].n
    if any(p.n != n for p in perms):
        raise ValueError("permutations must share one size")
    return MultiGraph(n=n, d=len(perms), maps=[p.mapping for p in perms])


def graph_from_mappings(maps: list[np.ndarray]) -> MultiGraph:
    return MultiGraph(n=len(maps[0]) - 1, d=len(maps), maps=maps)


@dataclasses.dataclass(frozen=True)
class CycleRecord:
    """A cycle: distinct vertices v_0..v_{k-1}, letter code j on the edge
    v_j -> v_{j+1}, and the canonical word of the traversal."""

    vertices: tuple[int, ...]
    codes: tuple[int, ...]
    word: Word

    @property
    def length(self) -> int:
        return len(self.vertices)


def cycle_key(vertices: tuple[int, ...], codes: tuple[int, ...]) -> tuple:
    """Canonical key identifying a cycle independently of traversal."""
    k = len(vertices)
    best = None
    for verts, cods in (
        (vertices, codes),
        ((vertices[0],) + vertices[1:][::-1], tuple(c ^ 1 for c in reversed(codes))),
    ):
        for r in range(k):
            cand = (verts[r:] + verts[:r], cods[r:] + cods[:r])
            if best is None or cand < best:
                best = cand
    return best  # type: ignore[return-value]


def _record(vertices: tuple[int, ...], codes: tuple[int, ...]) -> CycleRecord:
    verts, cods = cycle_key(vertices, codes)
    return CycleRecord(vertices=verts, codes=cods, word=canonical(cods))


def enumerate_cycles(g: MultiGraph, K: int) -> list[CycleRecord]:
    """Every cycle of length <= K exactly once (dedup over start and
    direction), by bounded DFS with minimal-dart pruning."""
    if K < 1:
        raise ValueError("K must be >= 1")
    found: list[CycleRecord] = []
    heads = g.heads
    out = g.out_darts
    # the dart set of a cycle is reversal-closed, so its minimum is even
    for e0 in range(0, g.ndarts, 2):
        x0 = g.dart_tail(e0)
        # stack entries: (dart path, visited vertices)
        stack = [(e0,)]
        while stack:
            path = stack.pop()
            head = int(heads[path[-1]])
            if head == x0:
                if min(min(path), min(p ^ 1 for p in path)) == e0:
                    verts = tuple(g.dart_tail(p) for p in path)
                    found.append(_record(verts, tuple(g.dart_label(p) for p in path)))
                continue
            if len(path) == K:
                continue
            body = {g.dart_tail(p) for p in path[1:]}
            if head in body:
                continue
            for f in out[head]:
                f = int(f)
                if f < e0 or (f ^ 1) < e0:
                    continue  # cannot be minimal
                if f in path or (f ^ 1) in path:
                    continue
                stack.append(path + (f,))
    # a k-cycle is reached from one start dart only, but guard against dups
    uniq = {(r.vertices, r.codes): r for r in found}
    return sorted(uniq.values(), key=lambda r: (r.length, r.vertices))


def _walk(maps: list[np.ndarray], invs: list[np.ndarray], codes: tuple[int, ...]) -> list[np.ndarray]:
    """Vertex arrays X_0..X_k of the word-walk started from every vertex."""
    n = len(maps[0]) - 1
    xs = [np.arange(1, n + 1, dtype=np.int64)]
    for c in codes:
        table = maps[c // 2] if c % 2 == 0 else invs[c // 2]
        xs.append(table[xs[-1]])
    return xs


def _distinct_mask(xs: list[np.ndarray], upto: int) -> np.ndarray:
    ok = np.ones(len(xs[0]), dtype=bool)
    for a in range(upto):
        for b in range(a + 1, upto):
            ok &= xs[a] != xs[b]
    return ok


def count_cycles_by_class(g: MultiGraph, table: WordClassTable) -> dict[Word, int]:
    """Exact per-class cycle counts via the vectorized word-walk.

    Each cycle is traversed once per (start, direction), i.e. 2k times in
    total spread over the orbit sequences, so dividing the hit count by 2k
    recovers the class count.
    """
    maps, invs = g.maps, g.invs
    out: dict[Word, int] = {}
    for k, classes in table.classes.items():
        for w in classes:
            hits = 0
            for seq in sorted(w.orbit()):
                xs = _walk(maps, invs, seq)
                valid = (xs[k] == xs[0]) & _distinct_mask(xs, k)
                hits += int(valid.sum())
            if hits % (2 * k) != 0:
                raise AssertionError(f"hit count {hits} not divisible by 2k for {w}")
            out[w] = hits // (2 * k)
    return out


def list_cycles_by_class(g: MultiGraph, table: WordClassTable) -> list[CycleRecord]:
    """Concrete cycles of every class in the table, deduplicated."""
    maps, invs = g.maps, g.invs
    uniq: dict[tuple, CycleRecord] = {}
    for k, classes in table.classes.items():
        for w in classes:
            for seq in sorted(w.orbit()):
                xs = _walk(maps, invs, seq)
                valid = (xs[k] == xs[0]) & _distinct_mask(xs, k)
                for m in np.flatnonzero(valid):
                    verts = tuple(int(xs[j][m]) for j in range(k))
                    key = cycle_key(verts, seq)
                    if key not in uniq:
                        uniq[key] = CycleRecord(vertices=key[0], codes=key[1], word=w)
    return sorted(uniq.values(), key=lambda r: (r.length, r.vertices))


def cycles_through_vertex(
    maps: list[np.ndarray], invs: list[np.ndarray], v: int, K: int
) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """(vertices, codes) of every cycle of length <= K through v, canonical keys."""
    d = len(maps)
    out: dict[tuple, None] = {}
    # DFS over (vertex path, code path) starting at v
    stack: list[tuple[tuple[int, ...], tuple[int, ...]]] = [((v,), ())]
    while stack:
        verts, codes = stack.pop()
        x = verts[-1]
        for c in range(2 * d):
            if codes and c == codes[-1] ^ 1:
                continue
            table = maps[c // 2] if c % 2 == 0 else invs[c // 2]
            y = int(table[x])
            if y == v:
                full = codes + (c,)
                if len(full) > 1 and full[0] == full[-1] ^ 1:
                    continue  # not cyclically reduced
                out[cycle_key(verts, full)] = None
                continue
            if len(codes) + 1 >= K or y in verts:
                continue
            stack.append((verts + (y,), codes + (c,)))
    return list(out.keys())


def cnbw_counts(g: MultiGraph, K: int, block: int = 4096) -> list[int]:
    """[tr(B^k) for k = 1..K] by blocked sparse-times-dense powering.

    Entries stay below 2^53, so float64 accumulation is exact.
    """
    B = g.nb_matrix()
    nd = g.ndarts
    totals = np.zeros(K, dtype=np.float64)
    for j0 in range(0, nd, block):
        j1 = min(j0 + block, nd)
        X = np.zeros((nd, j1 - j0))
        X[np.arange(j0, j1), np.arange(j1 - j0)] = 1.0
        for k in range(K):
            X = B @ X
            totals[k] += X[np.arange(j0, j1), np.arange(j1 - j0)].sum()
    return [int(round(t)) for t in totals]


def cnbw_count(g: MultiGraph, k: int) -> int:
    """Number of closed cyclically non-backtracking walks of length k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return cnbw_counts(g, k)[k - 1]


def _bfs_distances(g: MultiGraph, sources: set[int]) -> np.ndarray:
    dist = np.full(g.n + 1, -1, dtype=np.int64)
    frontier = list(sources)
    for v in frontier:
        dist[v] = 0
    maps, invs = g.maps, g.invs
    while frontier:
        nxt = []
        for v in frontier:
            for table in maps:
                u = int(table[v])
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    nxt.append(u)
            for table in invs:
                u = int(table[v])
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    nxt.append(u)
        frontier = nxt
    return dist


def is_tangle_free(g: MultiGraph, l: int, j: int) -> bool:
    """True iff every pair of distinct cycles of length <= l is at graph
    distance >= j (a shared vertex is distance 0)."""
    if l < 1 or j < 1:
        raise ValueError("l and j must be >= 1")
    cycles = enumerate_cycles(g, l)
    for a in range(len(cycles)):
        dist = _bfs_distances(g, set(cycles[a].vertices))
        for b in range(a + 1, len(cycles)):
            if min(int(dist[v]) for v in cycles[b].vertices) < j:
                return False
    return True


def precycle_count(g: MultiGraph, u: tuple[int, ...] | list[int]) -> int:
    """|S_u|: trails with word u (a concrete sequence, not a class) that the
    endpoint transposition closes into a cycle.

    Such a trail s_0 .. s_k must be non-closed with all vertices distinct, and
    exists only when sign(u_1) = sign(u_k).
    """
    codes = tuple(int(c) for c in u)
    if not codes:
        raise ValueError("empty word")
    if (codes[0] ^ codes[-1]) & 1:
        raise SignMismatch(f"first/last signs differ in {codes}")
    xs = _walk(g.maps, g.invs, codes)
    return int(_distinct_mask(xs, len(codes) + 1).sum())
