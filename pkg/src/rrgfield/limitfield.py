"""The limiting objects: the Poisson point process of cycle births, halving
and doubling chains in dimension, the limit count field N_w(t, s), and every
closed-form rate, MGF and covariance the finite-size simulations are tested
against.

Conventions: dimension coordinate t <= 0 with the front at 0; chain `time'
u = -t >= 0 runs backward in dimension; words with b(w) = 0 have infinite
lifetime and zero birth rate.
"""

from __future__ import annotations

import dataclasses
import math
from functools import lru_cache
from typing import Union

import numpy as np

from rrgfield.words import DEATH, Word, WordClassTable, a_count, canonical, double_letter, halvings

KILLED = -1  # chain absorbed by the cemetery


@lru_cache(maxsize=None)
def chain_tables(d: int, max_len: int) -> "ChainTables":
    return ChainTables.build(d, max_len)


@dataclasses.dataclass
class ChainTables:
    """Id-indexed word classes of length <= max_len with chain rate tables."""

    d: int
    max_len: int
    words: list[Word]
    index: dict[tuple[int, ...], int]
    lengths: np.ndarray
    hs: np.ndarray
    bs: np.ndarray
    cs: np.ndarray
    # halve_moves[i] = list of (target id or KILLED, multiplicity)
    halve_moves: list[list[tuple[int, int]]]

    @classmethod
    def build(cls, d: int, max_len: int) -> "ChainTables":
        table = WordClassTable.build(d, max_len)
        ws = table.all_words()
        index = {w.codes: i for i, w in enumerate(ws)}
        halve_moves: list[list[tuple[int, int]]] = []
        for w in ws:
            agg: dict[int, int] = {}
            for _, target in halvings(w):
                tid = KILLED if target is DEATH else index[target.codes]
                agg[tid] = agg.get(tid, 0) + 1
            halve_moves.append(sorted(agg.items()))
        return cls(
            d=d,
            max_len=max_len,
            words=ws,
            index=index,
            lengths=np.array([w.length for w in ws]),
            hs=np.array([w.h for w in ws]),
            bs=np.array([w.b for w in ws]),
            cs=np.array([w.c for w in ws]),
            halve_moves=halve_moves,
        )

    def id_of(self, w: Word) -> int:
        return self.index[w.codes]

    def ids_of_length(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.lengths == k)


@dataclasses.dataclass
class Atom:
    """PPP point: birth time z >= 0, lifetime v > 0 (inf when b = 0), word id."""

    z: float
    v: float
    word_id: int


def sample_chi(
    d: int, L: int, s0: float, rng: np.random.Generator, tables: ChainTables | None = None
) -> list[Atom]:
    """Atoms of the limiting PPP restricted to time [0, s0] and |w| <= L.

    Per class w: Poisson(1/h) atoms at z = 0 with Exp(2b) remaining lifetimes
    (memoryless restriction of the two-sided process), plus births on (0, s0]
    at rate 2b(w)/h(w).  Words with b = 0 never appear after 0 and their z = 0
    atoms never die.
    """
    if tables is None:
        tables = chain_tables(d, L)
    atoms: list[Atom] = []
    for wid in range(len(tables.words)):
        h = int(tables.hs[wid])
        b = int(tables.bs[wid])
        for _ in range(rng.poisson(1.0 / h)):
            v = math.inf if b == 0 else float(rng.exponential(1.0 / (2 * b)))
            atoms.append(Atom(z=0.0, v=v, word_id=wid))
        if b > 0 and s0 > 0:
            for z in rng.random(rng.poisson(2.0 * b / h * s0)):
                atoms.append(
                    Atom(z=float(z * s0), v=float(rng.exponential(1.0 / (2 * b))), word_id=wid)
                )
    return atoms


@dataclasses.dataclass
class ChainTrajectory:
    """Piecewise-constant chain path: states[i] holds on
    [jump_times[i], jump_times[i+1]); death_time set when absorbed."""

    jump_times: list[float]  # jump_times[0] == 0.0
    states: list[int]  # word ids, or KILLED as final state
    death_time: float | None

    def state_at(self, u: float) -> int:
        if self.death_time is not None and u >= self.death_time:
            return KILLED
        idx = 0  # trajectories are short; linear scan beats bisect here
        for j, t in enumerate(self.jump_times):
            if t <= u:
                idx = j
            else:
                break
        return self.states[idx]


def halving_chain(
    word: Union[Word, int],
    horizon: float,
    rng: np.random.Generator,
    tables: ChainTables,
) -> ChainTrajectory:
    """Sample the halving chain from `word` over chain time [0, horizon].

    From w: jump to u at rate j (the halving multiplicity), get killed at rate
    |w| - c(w); the total holding rate is |w|.
    """
    wid = word if isinstance(word, int) else tables.id_of(word)
    times = [0.0]
    states = [wid]
    t = 0.0
    while True:
        k = int(tables.lengths[wid])
        t += rng.exponential(1.0 / k)
        if t > horizon:
            return ChainTrajectory(times, states, None)
        u = rng.random() * k
        nxt = KILLED  # kill carries the remaining rate k - c
        acc = 0.0
        for tid, mult in tables.halve_moves[wid]:
            acc += mult
            if u < acc:
                nxt = tid
                break
        times.append(t)
        states.append(nxt)
        if nxt == KILLED:
            return ChainTrajectory(times, states, t)
        wid = nxt


def doubling_chain(word: Word, horizon: float, rng: np.random.Generator) -> ChainTrajectory:
    """Sample the doubling chain: each letter rings at rate 1 and doubles, so
    the word length is a Yule process and b grows by 1 per jump.

    States are canonical Words (returned in `.words`); ids are indices into
    that list since the state space is unbounded.
    """
    times = [0.0]
    state_words = [word]
    t = 0.0
    cur = word
    while True:
        k = cur.length
        t += rng.exponential(1.0 / k)
        if t > horizon:
            break
        cur = double_letter(cur, int(rng.integers(1, k + 1)))
        times.append(t)
        state_words.append(cur)
    traj = ChainTrajectory(times, list(range(len(state_words))), None)
    traj.words = state_words  # type: ignore[attr-defined]
    return traj


@dataclasses.dataclass
class LimitFieldSample:
    """Counts N_w(t, s) for grid t in [-T0, 0], s in [0, S0], |w| <= K."""

    tables: ChainTables
    K: int
    ts: np.ndarray  # ascending, last = 0
    ss: np.ndarray
    counts: np.ndarray  # shape (nt, ns, n_words)

    def count(self, w: Word, t: float, s: float) -> int:
        it = int(np.argmin(np.abs(self.ts - t)))
        js = int(np.argmin(np.abs(self.ss - s)))
        return int(self.counts[it, js, self.tables.id_of(w)])

    def n_k(self, k: int) -> np.ndarray:
        ids = self.tables.ids_of_length(k)
        return self.counts[:, :, ids].sum(axis=2)


@lru_cache(maxsize=None)
def _flat_chain_tables(d: int, max_len: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Padded transition tables for vectorized chain evolution.

    Returns (rates, slot_cum, slot_tgt): holding rate per word id, cumulative
    transition probabilities per slot (last slot the kill, cum = 1), and slot
    targets padded with KILLED.
    """
    tables = chain_tables(d, max_len)
    nw = len(tables.words)
    nslots = max(len(mv) for mv in tables.halve_moves) + 1
    slot_cum = np.ones((nw, nslots))
    slot_tgt = np.full((nw, nslots), KILLED, dtype=np.int64)
    for i, moves in enumerate(tables.halve_moves):
        k = float(tables.lengths[i])
        acc = 0.0
        for s, (tid, mult) in enumerate(moves):
            acc += mult / k
            slot_cum[i, s] = acc
            slot_tgt[i, s] = tid
    return tables.lengths.astype(np.float64), slot_cum, slot_tgt


def _sample_atom_arrays(
    tables: ChainTables, s0: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(word_id, z, v) arrays with the law of sample_chi, drawn vectorized."""
    ids = np.arange(len(tables.words))
    n0 = rng.poisson(1.0 / tables.hs)
    rate_b = np.where(tables.bs > 0, 2.0 * tables.bs / tables.hs, 0.0)
    nb = rng.poisson(rate_b * s0) if s0 > 0 else np.zeros_like(ids)
    wid = np.concatenate([np.repeat(ids, n0), np.repeat(ids, nb)])
    z = np.concatenate([np.zeros(int(n0.sum())), rng.random(int(nb.sum())) * s0])
    b = tables.bs[wid].astype(np.float64)
    v = np.full(len(wid), np.inf)
    pos = b > 0
    v[pos] = rng.standard_exponential(int(pos.sum())) / (2.0 * b[pos])
    return wid, z, v


def sample_limit_field(
    d: int,
    L: int,
    K: int,
    T0: float,
    S0: float,
    grid: tuple[int, int],
    rng: np.random.Generator,
    tables: ChainTables | None = None,
) -> LimitFieldSample:
    """One replica of the limiting field on the grid.

    Atoms come from the chi law at truncation L >= K; each atom carries a
    single halving chain shared across all s (the coupling: the backward path
    in dimension is identical at every time of existence).  Chains for all
    atoms are evolved in lockstep between grid dimensions.
    """
    if L < K:
        raise ValueError("need truncation L >= K")
    if tables is None:
        tables = chain_tables(d, L)
    rates, slot_cum, slot_tgt = _flat_chain_tables(d, L)
    nt, ns = grid
    ts = np.linspace(-T0, 0.0, nt)
    ss = np.linspace(0.0, S0, ns)
    counts = np.zeros((nt, ns, len(tables.words)), dtype=np.int64)
    kmask = tables.lengths <= K

    wid, z, v = _sample_atom_arrays(tables, S0, rng)
    state = wid.copy()
    alive = np.ones(len(wid), dtype=bool)
    t_next = rng.standard_exponential(len(wid)) / rates[state]
    exist = [(z <= s) & (z + v >= s) for s in ss]

    def snapshot(it: int) -> None:
        ok = alive & kmask[state]
        for js in range(ns):
            sel = state[ok & exist[js]]
            if len(sel):
                np.add.at(counts[it, js], sel, 1)

    # grid dimensions in ascending chain time u = -t
    order = np.argsort(-ts, kind="stable")
    for it in order:
        u = -ts[it]
        due = alive & (t_next <= u)
        while due.any():
            idx = np.flatnonzero(due)
            st = state[idx]
            r = rng.random(len(idx))
            choice = (r[:, None] >= slot_cum[st]).sum(axis=1)
            tgt = slot_tgt[st, choice]
            killed = tgt == KILLED
            alive[idx[killed]] = False
            live = idx[~killed]
            state[live] = tgt[~killed]
            t_next[live] = t_next[live] + rng.standard_exponential(len(live)) / rates[state[live]]
            due = alive & (t_next <= u)
        snapshot(int(it))
    return LimitFieldSample(tables=tables, K=K, ts=ts, ss=ss, counts=counts)


def scaled_X(sample: LimitFieldSample, d: int, k: int) -> np.ndarray:
    """X_k = (2d-1)^(-k/2) (2k N_k - a(d,k)), elementwise on the grid."""
    nk = sample.n_k(k)
    return (2 * k * nk - a_count(d, k)) / (2 * d - 1) ** (k / 2.0)


def yule_mgf(theta: float, s: float) -> float:
    """E exp(-2 s xi(theta)) for a Yule process xi from xi(0) = 1.

    xi(theta) is geometric with mean e^theta; as theta -> inf with
    s = v e^-theta / 2 the value tends to 1 / (1 + v).
    """
    if theta < 0 or s < 0:
        raise ValueError("need theta >= 0 and s >= 0")
    p = math.exp(-theta)
    z = math.exp(-2.0 * s)
    denom = -math.expm1(-2.0 * s) + p * z  # 1 - (1-p) z, stably
    return p * z / denom


def tau_mgf(j: int, s: float) -> float:
    """E exp(2 s tau), tau = sign changes around a j-cycle with iid +-1 marks."""
    if j < 1:
        raise ValueError("j must be >= 1")
    x = math.exp(2.0 * s)
    return ((1.0 + x) ** j + (1.0 - x) ** j) / 2.0**j


def birth_rate(t: float, w: Word) -> float:
    """Birth rate of w-atoms at dimension t <= 0:
    (2/h) (b - |w| + e^{-t} |w|); at t = 0 this is the chi intensity 2b/h."""
    if t > 0:
        raise ValueError("t must be <= 0")
    k = w.length
    return 2.0 / w.h * (w.b - k + math.exp(-t) * k)


def _reduced_sign_transfer(d: int, q: float) -> np.ndarray:
    """Transfer matrix M on letters with M[x, y] = [y != x^-1] q^[sign y = sign x];
    tr(M^j) = sum over cyclically reduced sequences of q^b."""
    m = np.empty((2 * d, 2 * d))
    for x in range(2 * d):
        for y in range(2 * d):
            if y == x ^ 1:
                m[x, y] = 0.0
            else:
                m[x, y] = q if (x ^ y) & 1 == 0 else 1.0
    return m


def sum_q_pow_b(d: int, j: int, q: float) -> float:
    """sum over cyclically reduced sequences of length j of q^{b}; equals
    a(d, j) at q = 1."""
    m = _reduced_sign_transfer(d, q)
    return float(np.trace(np.linalg.matrix_power(m, j)))


@dataclasses.dataclass(frozen=True)
class CovInterval:
    lo: float
    hi: float


def cov_finite_d(
    d: int, j: int, k: int, t1: float, s1: float, t2: float, s2: float
) -> float | CovInterval:
    """Covariance of (N_j(t1, s1), N_k(t2, s2)) in the limiting field.

    Cases: j != k at equal dimension -> exactly 0; j != k at different
    dimensions -> an interval bound (Cauchy-Schwarz upper end); j == k ->
    exact closed form

        e^{-j |t1-t2|} * sum_{classes w, |w|=j} (1/h(w)) E_w e^{-2 b(Y) s},

    with E_w e^{-2 b(Y) s} = e^{2sj} e^{-2s b(w)} yule_mgf(theta, s)^j,
    theta = -max(t1, t2), s = |s1 - s2|.  The class sum is evaluated by the
    sign transfer matrix via sum(1/h) e^{-2sb} = (1/2j) sum_{sequences} q^b.
    """
    if t1 > 0 or t2 > 0 or s1 < 0 or s2 < 0:
        raise ValueError("need t <= 0 and s >= 0")
    if j != k:
        if t1 == t2:
            return 0.0
        var_j = a_count(d, j) / (2.0 * j)
        var_k = a_count(d, k) / (2.0 * k)
        return CovInterval(0.0, math.sqrt(var_j * var_k))
    s = abs(s1 - s2)
    theta = -max(t1, t2)
    q = math.exp(-2.0 * s)
    class_sum = sum_q_pow_b(d, j, q) / (2.0 * j)
    return math.exp(-j * abs(t1 - t2)) * math.exp(2.0 * s * j) * yule_mgf(theta, s) ** j * class_sum


def cov_finite_d_enumerated(
    d: int, j: int, t1: float, s1: float, t2: float, s2: float
) -> float:
    """Same j == k covariance by explicit class enumeration (cross-check)."""
    s = abs(s1 - s2)
    theta = -max(t1, t2)
    tables = chain_tables(d, j)
    ids = tables.ids_of_length(j)
    class_sum = float(np.sum(np.exp(-2.0 * s * tables.bs[ids]) / tables.hs[ids]))
    return math.exp(-j * abs(t1 - t2)) * math.exp(2.0 * s * j) * yule_mgf(theta, s) ** j * class_sum


def cov_U(j: int, t1: float, s1: float, t2: float, s2: float) -> float:
    """Limit d -> inf covariance of the scaled field:
    2j e^{-j|t1-t2|} yule_mgf(theta, s)^j tau_mgf(j, s)."""
    if t1 > 0 or t2 > 0 or s1 < 0 or s2 < 0:
        raise ValueError("need t <= 0 and s >= 0")
    s = abs(s1 - s2)
    theta = -max(t1, t2)
    return 2.0 * j * math.exp(-j * abs(t1 - t2)) * yule_mgf(theta, s) ** j * tau_mgf(j, s)


def cov_G(j: int, u1: float, v1: float, u2: float, v2: float) -> float:
    """Slow-time rescaled limit of cov_U:
    2j (e^{-|u1-u2|} / (1 + |v1-v2| e^{-max(u1,u2)}))^j."""
    if v1 < 0 or v2 < 0:
        raise ValueError("need v >= 0")
    return 2.0 * j * (
        math.exp(-abs(u1 - u2)) / (1.0 + abs(v1 - v2) * math.exp(-max(u1, u2)))
    ) ** j


def bd_generator(w: Word) -> tuple[float, float]:
    """(birth rate, per-atom death rate) of N_w(0, .): (2b/h, 2b); the
    stationary law is Poisson(1/h)."""
    return (2.0 * w.b / w.h, 2.0 * w.b)
