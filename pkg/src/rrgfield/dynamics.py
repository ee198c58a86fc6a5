"""The two-parameter graph field G(t, s): random-transposition evolution in
time and the coupled backward Chinese-restaurant projection in dimension.

One realization (dimension clock, towers, transposition log) serves a whole
grid of (t, s) read-out points; independent per-cell sampling would destroy
the covariances under test.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from rrgfield.tower import (
    DimensionClock,
    Permutation,
    PermutationTower,
    new_tower,
    sample_dimension,
)


@dataclasses.dataclass
class TranspositionLog:
    """Time-ordered transposition events on labels 1..n.

    Each label rings at rate 1 and picks a uniform partner, so every unordered
    pair occurs at total rate 2/(n-1) and the event count over [0, s0] is
    Poisson(n * s0).
    """

    times: np.ndarray
    a: np.ndarray
    b: np.ndarray
    n: int

    def __len__(self) -> int:
        return len(self.times)

    def validate(self) -> None:
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("event times must be strictly increasing")
        if np.any(self.a == self.b):
            raise ValueError("transposition labels must differ")
        for arr in (self.a, self.b):
            if len(arr) and (arr.min() < 1 or arr.max() > self.n):
                raise ValueError("labels out of range")


def evolve(n: int, s0: float, rng: np.random.Generator) -> TranspositionLog:
    """Sample the transposition log on [0, s0] for n labels."""
    if n < 2:
        raise ValueError("need n >= 2 to transpose")
    if s0 < 0:
        raise ValueError("s0 must be >= 0")
    count = int(rng.poisson(n * s0))
    times = np.sort(rng.random(count)) * s0
    a = rng.integers(1, n + 1, size=count)
    b = rng.integers(1, n, size=count)
    b += b >= a
    return TranspositionLog(times=times, a=a, b=b, n=n)


class SigmaCursor:
    """Left product of transpositions up to a time s, advanced incrementally."""

    def __init__(self, log: TranspositionLog):
        self.log = log
        self.sigma = np.arange(log.n + 1, dtype=np.int64)
        self.sigma_inv = np.arange(log.n + 1, dtype=np.int64)
        self.pos = 0

    def advance_to(self, s: float) -> None:
        times, a, b = self.log.times, self.log.a, self.log.b
        sig, inv = self.sigma, self.sigma_inv
        while self.pos < len(times) and times[self.pos] <= s:
            i, j = int(a[self.pos]), int(b[self.pos])
            xi, xj = int(inv[i]), int(inv[j])
            sig[xi], sig[xj] = j, i
            inv[i], inv[j] = xj, xi
            self.pos += 1

    def permutation(self) -> Permutation:
        return Permutation(self.sigma.copy())


def sigma_at(log: TranspositionLog, s: float) -> Permutation:
    """sigma_s = tau_k ... tau_1 (earliest applied first) as a Permutation."""
    cur = SigmaCursor(log)
    cur.advance_to(s)
    return cur.permutation()


@dataclasses.dataclass
class FieldState:
    """One realization of the coupled field: d towers of common size n, the
    dimension clock that produced n, and a transposition log at size n."""

    d: int
    towers: list[PermutationTower]
    clock: DimensionClock
    log: TranspositionLog
    T: float

    @property
    def n(self) -> int:
        return self.clock.m

    @classmethod
    def sample(cls, d: int, T: float, s0: float, rng: np.random.Generator) -> "FieldState":
        clock = sample_dimension(T, rng)
        n = max(clock.m, 2)  # evolve needs two labels; degenerate clocks padded
        if n > clock.m:
            clock = DimensionClock(
                jump_times=np.concatenate([clock.jump_times, np.full(n - clock.m, T)]),
                horizon=T,
            )
        towers = [new_tower(n, rng) for _ in range(d)]
        log = evolve(n, s0, rng)
        return cls(d=d, towers=towers, clock=clock, log=log, T=T)

    def time_mappings(self, sigma: np.ndarray) -> list[np.ndarray]:
        """Mappings of sigma_s . pi_i for all i."""
        return [sigma[tw.level_mapping(self.n)] for tw in self.towers]


class ProjectionCursor:
    """Backward-dimension projection of the time-s permutations.

    Deletes labels sigma_s(n), sigma_s(n-1), ... by cycle bypass on the
    original labels; snapshots relabel the survivors order-preservingly, which
    composes to the rank map among alive labels.
    """

    def __init__(self, mappings: list[np.ndarray], removal_order: np.ndarray):
        self.maps = [m.copy() for m in mappings]
        self.invs = []
        for m in self.maps:
            inv = np.zeros_like(m)
            inv[m] = np.arange(len(m))
            self.invs.append(inv)
        self.n = len(self.maps[0]) - 1
        self.alive = np.ones(self.n + 1, dtype=bool)
        self.alive[0] = False
        self.removal = removal_order
        self.dim = self.n

    def project_to(self, m: int) -> None:
        if m > self.dim:
            raise ValueError("cursor can only move down in dimension")
        while self.dim > m:
            x = int(self.removal[self.n - self.dim])
            for mp, inv in zip(self.maps, self.invs):
                pred, succ = int(inv[x]), int(mp[x])
                if pred != x:
                    mp[pred] = succ
                    inv[succ] = pred
                mp[x] = x
                inv[x] = x
            self.alive[x] = False
            self.dim -= 1

    def snapshot(self) -> list[Permutation]:
        labels = np.flatnonzero(self.alive)
        relab = np.zeros(self.n + 1, dtype=np.int64)
        relab[labels] = np.arange(1, len(labels) + 1)
        out = []
        for mp in self.maps:
            arr = np.zeros(len(labels) + 1, dtype=np.int64)
            arr[relab[labels]] = relab[mp[labels]]
            out.append(Permutation(arr))
        return out


def project(state: FieldState, s: float, m: int) -> list[Permutation]:
    """The d size-m permutations of G(., s) projected from dimension n.

    At s = 0 this reproduces the towers' own level m bit-exactly.
    """
    if not 0 <= m <= state.n:
        raise ValueError(f"m={m} out of range")
    sigma = sigma_at(state.log, s)
    removal = sigma.mapping[np.arange(state.n, 0, -1)]
    cursor = ProjectionCursor(state.time_mappings(sigma.mapping), removal)
    cursor.project_to(m)
    return cursor.snapshot()


@dataclasses.dataclass
class FieldGrid:
    """Snapshots of the coupled field on a (dimension-time x clock-time) grid."""

    ts: np.ndarray
    ss: np.ndarray
    dims: np.ndarray
    cells: list[list[list[Permutation]]]  # [it][js] -> d permutations


def field_grid(
    d: int,
    T: float,
    T0: float,
    S0: float,
    grid: tuple[int, int],
    rng: np.random.Generator,
    state: FieldState | None = None,
) -> FieldGrid:
    """Read the whole grid from one realization (full coupling).

    Grid dimensions are t in [T-T0, T] (nt points, ascending) and
    s in [0, S0] (ns points).
    """
    nt, ns = grid
    if nt < 1 or ns < 1:
        raise ValueError("grid sizes must be >= 1")
    if not T >= T0 >= 0:
        raise ValueError("need T >= T0 >= 0")
    if state is None:
        state = FieldState.sample(d, T, S0, rng)
    ts = np.linspace(T - T0, T, nt)
    ss = np.linspace(0.0, S0, ns)
    dims = np.array([state.clock.m_at(min(t, T)) for t in ts], dtype=np.int64)
    if dims.min() < 2:
        raise ValueError(f"dimension {dims.min()} < 2 at requested grid time")
    cells: list[list[list[Permutation]]] = [[None] * ns for _ in range(nt)]  # type: ignore[list-item]
    sigma_cur = SigmaCursor(state.log)
    for js, s in enumerate(ss):
        sigma_cur.advance_to(s)
        sigma = sigma_cur.sigma
        removal = sigma[np.arange(state.n, 0, -1)]
        proj = ProjectionCursor(state.time_mappings(sigma), removal)
        for it in range(nt - 1, -1, -1):
            proj.project_to(int(dims[it]))
            cells[it][js] = proj.snapshot()
    return FieldGrid(ts=ts, ss=ss, dims=dims, cells=cells)
