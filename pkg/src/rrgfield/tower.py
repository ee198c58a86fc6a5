"""Permutation towers grown by the Chinese restaurant insertion rule, and the
Poissonized dimension clock that drives graph growth.

A tower stores only its insertion log (one choice per level); any level is a
deterministic replay of the log, which makes the consistency condition
"deleting label n from level n gives level n-1" hold bit-exactly.
Labels are 1-based; mapping arrays have length n+1 with slot 0 unused.
"""

from __future__ import annotations

import dataclasses
import struct
from functools import cached_property

import numpy as np


@dataclasses.dataclass(eq=False)
class Permutation:
    """Bijection on {1..n} stored with its inverse."""

    mapping: np.ndarray  # int64, length n+1, mapping[0] == 0

    @property
    def n(self) -> int:
        return len(self.mapping) - 1

    @cached_property
    def inverse(self) -> np.ndarray:
        inv = np.zeros_like(self.mapping)
        inv[self.mapping] = np.arange(len(self.mapping))
        return inv

    def __call__(self, x: int) -> int:
        return int(self.mapping[x])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.mapping, other.mapping))

    def validate(self) -> None:
        m = self.mapping
        if m[0] != 0:
            raise ValueError("slot 0 must map to 0")
        if sorted(m[1:].tolist()) != list(range(1, self.n + 1)):
            raise ValueError("mapping is not a bijection on 1..n")

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n + 1, dtype=np.int64))

    @classmethod
    def uniform(cls, n: int, rng: np.random.Generator) -> "Permutation":
        m = np.zeros(n + 1, dtype=np.int64)
        m[1:] = rng.permutation(n) + 1
        return cls(m)

    @classmethod
    def from_cycles(cls, n: int, cycles: list[tuple[int, ...]]) -> "Permutation":
        m = np.arange(n + 1, dtype=np.int64)
        for cyc in cycles:
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                m[a] = b
        p = cls(m)
        p.validate()
        return p

    def cycles(self) -> list[tuple[int, ...]]:
        """Cycle decomposition, each cycle starting at its least label."""
        seen = np.zeros(self.n + 1, dtype=bool)
        out = []
        for start in range(1, self.n + 1):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            x = int(self.mapping[start])
            while x != start:
                cyc.append(x)
                seen[x] = True
                x = int(self.mapping[x])
            out.append(tuple(cyc))
        return out

    def key(self) -> bytes:
        return self.mapping[1:].tobytes()


def insert_with_choice(p: Permutation, choice: int) -> Permutation:
    """Insert label n+1; choice in 1..n+1, with choice == n+1 a fixed point,
    otherwise the new label goes into the cycle right after `choice`."""
    n = p.n
    if not 1 <= choice <= n + 1:
        raise ValueError(f"choice {choice} out of range for n={n}")
    m = np.empty(n + 2, dtype=np.int64)
    m[: n + 1] = p.mapping
    if choice == n + 1:
        m[n + 1] = n + 1
    else:
        m[n + 1] = m[choice]
        m[choice] = n + 1
    return Permutation(m)


def crp_insert(p: Permutation, rng: np.random.Generator) -> Permutation:
    """One Chinese-restaurant step: uniform on S_{n+1} given uniform input."""
    return insert_with_choice(p, int(rng.integers(1, p.n + 2)))


def crp_delete(p: Permutation, x: int) -> Permutation:
    """Bypass x in its cycle, then relabel survivors order-preservingly."""
    n = p.n
    if not 1 <= x <= n:
        raise ValueError(f"label {x} out of range for n={n}")
    m = p.mapping.copy()
    pred = int(p.inverse[x])
    if pred != x:
        m[pred] = m[x]
        m[x] = x
    # order-preserving relabel {1..n}\{x} -> {1..n-1}
    relab = np.arange(n + 1, dtype=np.int64)
    relab[x + 1:] -= 1
    keep = np.concatenate((np.arange(1, x), np.arange(x + 1, n + 1)))
    out = np.zeros(n, dtype=np.int64)
    out[relab[keep]] = relab[m[keep]]
    return Permutation(out)


@dataclasses.dataclass
class PermutationTower:
    """CRP-consistent sequence of permutations, materialized lazily from the
    insertion log.  choices[m-1] built level m from level m-1."""

    choices: list[int]

    @property
    def n(self) -> int:
        return len(self.choices)

    def level_mapping(self, m: int) -> np.ndarray:
        if not 0 <= m <= self.n:
            raise ValueError(f"level {m} out of range for tower of size {self.n}")
        arr = np.zeros(m + 1, dtype=np.int64)
        ch = self.choices
        for lbl in range(1, m + 1):
            c = ch[lbl - 1]
            if c == lbl:
                arr[lbl] = lbl
            else:
                arr[lbl] = arr[c]
                arr[c] = lbl
        return arr

    def level(self, m: int) -> Permutation:
        return Permutation(self.level_mapping(m))

    def top(self) -> Permutation:
        return self.level(self.n)

    def to_bytes(self) -> bytes:
        head = struct.pack("<BQ", 1, self.n)
        return head + np.asarray(self.choices, dtype=np.uint32).tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "PermutationTower":
        version, n = struct.unpack_from("<BQ", blob, 0)
        if version != 1:
            raise ValueError(f"unsupported tower log version {version}")
        choices = np.frombuffer(blob, dtype=np.uint32, count=n, offset=9)
        return cls(choices=[int(c) for c in choices])


def grow_tower(tower: PermutationTower, n_target: int, rng: np.random.Generator) -> PermutationTower:
    """Extend the insertion log to n_target levels (no-op if already there)."""
    choices = list(tower.choices)
    m = len(choices)
    if n_target > m:
        u = rng.random(n_target - m)
        sizes = np.arange(m + 1, n_target + 1)
        choices.extend((np.floor(u * sizes) + 1).astype(np.int64).tolist())
    return PermutationTower(choices=choices)


def new_tower(n: int, rng: np.random.Generator) -> PermutationTower:
    return grow_tower(PermutationTower(choices=[]), n, rng)


@dataclasses.dataclass
class DimensionClock:
    """Arrival times of the Poissonized dimension process M_t.

    jump_times[i] is the arrival time of label i+1; gaps are independent
    Exp(i) at index i.  M_t + 1 is a Yule process started from 1, so
    E[M_t] = e^t - 1.
    """

    jump_times: np.ndarray
    horizon: float

    @property
    def m(self) -> int:
        return len(self.jump_times)

    def m_at(self, t: float) -> int:
        if t < 0 or t > self.horizon + 1e-12:
            raise ValueError(f"t={t} outside sampled horizon {self.horizon}")
        return int(np.searchsorted(self.jump_times, t, side="right"))


def sample_dimension(t: float, rng: np.random.Generator) -> DimensionClock:
    """Sample the dimension clock over [0, t]."""
    if t < 0:
        raise ValueError("t must be >= 0")
    times: list[np.ndarray] = []
    total = 0.0
    start = 1
    while True:
        rates = np.arange(start, start + 256, dtype=np.float64)
        gaps = rng.standard_exponential(256) / rates
        cum = total + np.cumsum(gaps)
        if cum[-1] > t:
            times.append(cum[cum <= t])
            break
        times.append(cum)
        total = float(cum[-1])
        start += 256
    jumps = np.concatenate(times) if times else np.empty(0)
    return DimensionClock(jump_times=jumps, horizon=t)
