"""Cycle trackers: empirical birth/death rates of word cycles under the
transposition dynamics, and halving/kill transitions of cycles under the
backward Chinese-restaurant deletion order.

A tracked cycle is (vertices, codes) with code j labeling the edge
v_j -> v_{j+1}.  Under a transposition (I, J), a vertex whose two incident
traversal steps share a sign opens the cycle (the same-sign positions number
b(w)); a vertex at sign-change position with both adjacent permutation heads
equal to it is replaced by its partner; other vertices leave the cycle
untouched.  Under deletion of vertex v, the cycle halves when its two edges
at v are the same letter (a double-letter position) and dies otherwise.
"""

from __future__ import annotations

import dataclasses
from collections import defaultdict

import numpy as np

from rrgfield.cycles import cycle_key, cycles_through_vertex, graph_from_mappings, list_cycles_by_class
from rrgfield.words import Word, WordClassTable, canonical


@dataclasses.dataclass
class _Tracked:
    verts: tuple[int, ...]
    codes: tuple[int, ...]
    word: Word


class RateAccumulator:
    """Per-class alive-time integrals and event counts, flushed lazily."""

    def __init__(self) -> None:
        self.alive: dict[Word, int] = defaultdict(int)
        self.alive_time: dict[Word, float] = defaultdict(float)
        self.last_flush: dict[Word, float] = {}
        self.deaths: dict[Word, int] = defaultdict(int)
        self.births: dict[Word, int] = defaultdict(int)
        self.transitions: dict[tuple[Word, object], int] = defaultdict(int)

    def flush(self, w: Word, t: float) -> None:
        t0 = self.last_flush.get(w, 0.0)
        self.alive_time[w] += self.alive[w] * (t - t0)
        self.last_flush[w] = t

    def change(self, w: Word, delta: int, t: float) -> None:
        self.flush(w, t)
        self.alive[w] += delta

    def finalize(self, t_end: float) -> None:
        for w in list(self.alive):
            self.flush(w, t_end)


class TimeDynamicsTracker:
    """Tracks every cycle of length <= kmax under the transposition chain."""

    def __init__(self, maps: list[np.ndarray], table: WordClassTable):
        self.d = len(maps)
        self.n = len(maps[0]) - 1
        self.kmax = table.max_len
        g = graph_from_mappings(maps)
        self.maps = [m.tolist() for m in maps]
        self.invs = [inv.tolist() for inv in g.invs]
        self.acc = RateAccumulator()
        self.cycles: dict[int, _Tracked] = {}
        self.by_key: dict[tuple, int] = {}
        self.by_vertex: dict[int, set[int]] = defaultdict(set)
        self._next_id = 0
        self._word_cache: dict[tuple[int, ...], Word] = {}
        for rec in list_cycles_by_class(g, table):
            self._add(rec.vertices, rec.codes, rec.word, 0.0, birth=False)

    def _word_of(self, codes: tuple[int, ...]) -> Word:
        w = self._word_cache.get(codes)
        if w is None:
            w = canonical(codes)
            self._word_cache[codes] = w
        return w

    def _add(self, verts: tuple[int, ...], codes: tuple[int, ...], word: Word,
             t: float, birth: bool) -> None:
        cid = self._next_id
        self._next_id += 1
        self.cycles[cid] = _Tracked(verts, codes, word)
        self.by_key[(verts, codes)] = cid
        for v in verts:
            self.by_vertex[v].add(cid)
        self.acc.change(word, +1, t)
        if birth:
            self.acc.births[word] += 1

    def _remove(self, cid: int, t: float, death: bool) -> None:
        c = self.cycles.pop(cid)
        del self.by_key[(c.verts, c.codes)]
        for v in c.verts:
            s = self.by_vertex[v]
            s.discard(cid)
            if not s:
                del self.by_vertex[v]
        self.acc.change(c.word, -1, t)
        if death:
            self.acc.deaths[c.word] += 1

    def _walk_ok(self, verts: tuple[int, ...], codes: tuple[int, ...]) -> bool:
        k = len(verts)
        for j, c in enumerate(codes):
            table = self.maps[c // 2] if c % 2 == 0 else self.invs[c // 2]
            if table[verts[j]] != verts[(j + 1) % k]:
                return False
        return len(set(verts)) == k

    def apply_event(self, t: float, i: int, j: int) -> None:
        # left-multiply every permutation by the transposition (i, j)
        for g in range(self.d):
            mp, inv = self.maps[g], self.invs[g]
            xi, xj = inv[i], inv[j]
            mp[xi], mp[xj] = j, i
            inv[i], inv[j] = xj, xi
        touched = self.by_vertex.get(i, set()) | self.by_vertex.get(j, set())
        for cid in list(touched):
            self._classify(cid, t, i, j)
        # births: any new cycle uses a rewired edge, whose head is now i or j
        for v in (i, j):
            for verts, codes in cycles_through_vertex(self.maps, self.invs, v, self.kmax):
                if (verts, codes) not in self.by_key:
                    self._add(verts, codes, self._word_of(codes), t, birth=True)

    def _classify(self, cid: int, t: float, i: int, j: int) -> None:
        c = self.cycles[cid]
        verts, codes = c.verts, c.codes
        k = len(verts)
        new_verts = list(verts)
        for a, v in enumerate(verts):
            if v != i and v != j:
                continue
            # multiplicity of v as a permutation head among its cycle edges
            mult = (codes[a - 1] % 2 == 0) + (codes[a] % 2 == 1)
            if mult == 1:
                self._remove(cid, t, death=True)
                return
            if mult == 2:
                new_verts[a] = j if v == i else i
        nv = tuple(new_verts)
        if nv == verts:
            return
        if not self._walk_ok(nv, codes):
            self._remove(cid, t, death=True)
            return
        # the cycle moved: same word, new vertex set
        self._remove(cid, t, death=False)
        key = cycle_key(nv, codes)
        if key not in self.by_key:
            self._add(key[0], key[1], c.word, t, birth=False)


def run_time_tracker(
    maps: list[np.ndarray],
    table: WordClassTable,
    horizon: float,
    rng: np.random.Generator,
) -> RateAccumulator:
    """Evolve for `horizon` time units, tracking cycle births and deaths."""
    tracker = TimeDynamicsTracker(maps, table)
    n = tracker.n
    count = int(rng.poisson(n * horizon))
    times = np.sort(rng.random(count)) * horizon
    a = rng.integers(1, n + 1, size=count)
    b = rng.integers(1, n, size=count)
    b += b >= a
    for idx in range(count):
        tracker.apply_event(float(times[idx]), int(a[idx]), int(b[idx]))
    tracker.acc.finalize(horizon)
    return tracker.acc


class BackwardTracker:
    """Tracks cycles under backward CRP deletions; transitions follow the
    halving chain (halve at double-letter positions, die elsewhere)."""

    def __init__(self, maps: list[np.ndarray], table: WordClassTable, kmax_rates: int):
        g = graph_from_mappings(maps)
        self.kmax_rates = kmax_rates
        self.acc = RateAccumulator()
        self.cycles: dict[int, _Tracked] = {}
        self.by_vertex: dict[int, set[int]] = defaultdict(set)
        self._next_id = 0
        self._word_cache: dict[tuple[int, ...], Word] = {}
        for rec in list_cycles_by_class(g, table):
            self._add(rec.vertices, rec.codes, rec.word, 0.0)

    def _word_of(self, codes: tuple[int, ...]) -> Word:
        w = self._word_cache.get(codes)
        if w is None:
            w = canonical(codes)
            self._word_cache[codes] = w
        return w

    def _counted(self, w: Word) -> bool:
        return w.length <= self.kmax_rates

    def _add(self, verts: tuple[int, ...], codes: tuple[int, ...], word: Word, u: float) -> None:
        cid = self._next_id
        self._next_id += 1
        self.cycles[cid] = _Tracked(verts, codes, word)
        for v in verts:
            self.by_vertex[v].add(cid)
        if self._counted(word):
            self.acc.change(word, +1, u)

    def _remove(self, cid: int, u: float) -> None:
        c = self.cycles.pop(cid)
        for v in c.verts:
            s = self.by_vertex[v]
            s.discard(cid)
            if not s:
                del self.by_vertex[v]
        if self._counted(c.word):
            self.acc.change(c.word, -1, u)

    def delete_vertex(self, v: int, u: float) -> None:
        for cid in list(self.by_vertex.get(v, ())):
            c = self.cycles[cid]
            verts, codes = c.verts, c.codes
            a = verts.index(v)
            k = len(verts)
            if k == 1:
                # a loop's only vertex: the length-1 word halves to the cemetery
                if self._counted(c.word):
                    self.acc.transitions[(c.word, "death")] += 1
                self._remove(cid, u)
            elif codes[a - 1] == codes[a]:
                # double-letter position: bypass merges the pair, cycle halves
                nverts = verts[:a] + verts[a + 1:]
                ncodes = codes[:a] + codes[a + 1:]
                nword = self._word_of(ncodes)
                if self._counted(c.word):
                    self.acc.transitions[(c.word, nword)] += 1
                self._remove(cid, u)
                key = cycle_key(nverts, ncodes)
                self._add(key[0], key[1], nword, u)
            else:
                if self._counted(c.word):
                    self.acc.transitions[(c.word, "kill")] += 1
                self._remove(cid, u)


def run_backward_tracker(
    maps: list[np.ndarray],
    jump_times: np.ndarray,
    T: float,
    T0: float,
    table: WordClassTable,
    kmax_rates: int,
) -> RateAccumulator:
    """Replay deletions n, n-1, ... until backward time T0, recording halving
    transitions at the clock's actual backward times."""
    tracker = BackwardTracker(maps, table, kmax_rates)
    n = len(maps[0]) - 1
    for m in range(n, 0, -1):
        u = T - float(jump_times[m - 1])
        if u > T0:
            break
        tracker.delete_vertex(m, u)
    tracker.acc.finalize(T0)
    return tracker.acc
