"""Cyclically reduced words over d generators, up to rotation and inversion.

A word is a cyclic sequence of letters ``pi_i`` / ``pi_i^-1`` read along a
cycle of the graph.  Words that differ by rotation or by inversion (reverse
the order and invert every letter) are identified; this module provides the
canonical representative of each class together with the statistics

* ``length``: number of letters,
* ``h``: periodicity, the largest m with w = u^m,
* ``b``: letters whose sign repeats the sign of the cyclic predecessor,
* ``c``: cyclic double-letter pairs (positions i with w_i = w_{i+1}),

and the doubling / halving moves between classes of adjacent lengths.

Letters are encoded as small integers ``2*(generator-1) + (0 if sign>0 else
1)`` so that the generator order ``p1 < P1 < p2 < P2 < ...`` is plain integer
order and inversion is ``code ^ 1``.
"""

from __future__ import annotations

import dataclasses
from functools import cached_property, lru_cache
from typing import Iterator, Sequence, Union


class NotCyclicallyReduced(ValueError):
    """A letter sequence has an adjacent (cyclic) letter/inverse pair."""


class BudgetExceeded(RuntimeError):
    """Class enumeration would exceed the configured work budget."""


class _Death:
    __slots__ = ()

    def __repr__(self) -> str:
        return "DEATH"


#: Cemetery state reached by halving a one-letter word.
DEATH = _Death()


@dataclasses.dataclass(frozen=True)
class Letter:
    generator: int
    sign: int

    def __post_init__(self) -> None:
        if self.generator < 1:
            raise ValueError(f"generator must be >= 1, got {self.generator}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")

    def inverse(self) -> "Letter":
        return Letter(self.generator, -self.sign)

    @property
    def code(self) -> int:
        return 2 * (self.generator - 1) + (0 if self.sign > 0 else 1)

    @classmethod
    def from_code(cls, code: int) -> "Letter":
        return cls(code // 2 + 1, 1 if code % 2 == 0 else -1)

    def __str__(self) -> str:
        tag = "p" if self.sign > 0 else "P"
        return f"{tag}{self.generator}"


def _invert(codes: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(c ^ 1 for c in reversed(codes))


def _rotations(codes: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    for i in range(len(codes)):
        yield codes[i:] + codes[:i]


def _orbit(codes: tuple[int, ...]) -> set[tuple[int, ...]]:
    orb = set(_rotations(codes))
    orb.update(_rotations(_invert(codes)))
    return orb


def _is_reduced(codes: Sequence[int]) -> bool:
    k = len(codes)
    return all(codes[(i + 1) % k] != codes[i] ^ 1 for i in range(k))


LetterLike = Union[Letter, int]


def _to_codes(raw: Union["Word", Sequence[LetterLike]]) -> tuple[int, ...]:
    if isinstance(raw, Word):
        return raw.codes
    out = []
    for x in raw:
        out.append(x.code if isinstance(x, Letter) else int(x))
    return tuple(out)


@dataclasses.dataclass(frozen=True)
class Word:
    """Canonical representative of a rotation+inversion class.

    Construct through :func:`canonical`; the constructor trusts its input.
    """

    codes: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.codes)

    @property
    def length(self) -> int:
        return len(self.codes)

    @cached_property
    def h(self) -> int:
        k = len(self.codes)
        for p in range(1, k + 1):
            if k % p == 0 and self.codes[p:] + self.codes[:p] == self.codes:
                return k // p
        raise AssertionError("unreachable")

    @cached_property
    def b(self) -> int:
        codes = self.codes
        return sum((codes[i] ^ codes[i - 1]) & 1 == 0 for i in range(len(codes)))

    @cached_property
    def c(self) -> int:
        codes = self.codes
        k = len(codes)
        return sum(codes[i] == codes[(i + 1) % k] for i in range(k))

    @property
    def letters(self) -> tuple[Letter, ...]:
        return tuple(Letter.from_code(c) for c in self.codes)

    def orbit_size(self) -> int:
        return 2 * len(self.codes) // self.h

    def orbit(self) -> set[tuple[int, ...]]:
        return _orbit(self.codes)

    def __str__(self) -> str:
        return ".".join(str(l) for l in self.letters)


def canonical(raw: Union[Word, Sequence[LetterLike]]) -> Word:
    """Canonical class representative of a raw letter sequence.

    Two inputs related by rotation and/or inversion map to equal outputs.
    Raises :class:`NotCyclicallyReduced` on an adjacent inverse pair.
    """
    codes = _to_codes(raw)
    if not codes:
        raise ValueError("empty letter sequence")
    if not _is_reduced(codes):
        raise NotCyclicallyReduced(f"sequence {codes} is not cyclically reduced")
    return Word(min(_orbit(codes)))


def word_stats(w: Word) -> tuple[int, int, int, int]:
    """(length, h, b, c) of a word; k - b equals the cyclic sign-change count."""
    return (w.length, w.h, w.b, w.c)


def a_count(d: int, k: int) -> int:
    """Number of cyclically reduced letter sequences of length k on d generators.

    Exact integer: (2d-1)^k - 1 + 2d for even k, (2d-1)^k + 1 for odd k.
    Python integers are unbounded, so no overflow is possible.
    """
    if d < 1 or k < 1:
        raise ValueError("need d >= 1 and k >= 1")
    base = (2 * d - 1) ** k
    return base - 1 + 2 * d if k % 2 == 0 else base + 1


def _reduced_sequences(d: int, k: int) -> Iterator[tuple[int, ...]]:
    """All cyclically reduced code sequences of length k, lexicographically."""
    nletters = 2 * d
    seq = [0] * k

    def rec(i: int) -> Iterator[tuple[int, ...]]:
        if i == k:
            if seq[0] != seq[k - 1] ^ 1:
                yield tuple(seq)
            return
        prev = seq[i - 1] if i > 0 else None
        for c in range(nletters):
            if prev is not None and c == prev ^ 1:
                continue
            seq[i] = c
            yield from rec(i + 1)

    if k == 1:
        for c in range(nletters):
            yield (c,)
    else:
        yield from rec(0)


def enumerate_classes(d: int, k: int, *, budget: int = 5_000_000) -> list[Word]:
    """One canonical Word per rotation+inversion class of length k.

    Direct generation of all reduced sequences with on-the-fly orbit dedup;
    the lexicographically first member of each orbit is its canonical form.
    Satisfies sum over classes of 2k/h(w) = a_count(d, k).
    """
    work = 2 * d * max(1, (2 * d - 1)) ** (k - 1)
    if work > budget:
        raise BudgetExceeded(f"enumeration of (d={d}, k={k}) needs ~{work} sequences > budget {budget}")
    classes: list[Word] = []
    seen: set[tuple[int, ...]] = set()
    for seq in _reduced_sequences(d, k):
        if seq in seen:
            continue
        seen.update(_orbit(seq))
        classes.append(Word(seq))
    return classes


def double_letter(w: Word, i: int) -> Word:
    """Double the i-th letter (1-based); never breaks cyclic reduction."""
    if not 1 <= i <= len(w):
        raise ValueError(f"position {i} out of range for |w|={len(w)}")
    codes = w.codes
    return canonical(codes[:i] + (codes[i - 1],) + codes[i:])


def halvings(w: Word) -> list[tuple[int, Union[Word, _Death]]]:
    """All halving moves of w: one entry per cyclic double-letter position.

    Entry (i, u) deletes one letter of the pair at position i (1-based,
    w_i = w_{i+1} cyclically) giving the canonical Word u one letter shorter,
    or DEATH when |w| = 1.  The list has exactly c(w) entries.
    """
    codes = w.codes
    k = len(codes)
    if k == 1:
        return [(1, DEATH)]
    out: list[tuple[int, Union[Word, _Death]]] = []
    for i in range(1, k + 1):
        j = i % k  # index of the second letter of the pair
        if codes[i - 1] == codes[j]:
            out.append((i, canonical(codes[:j] + codes[j + 1:])))
    return out


@dataclasses.dataclass
class WordClassTable:
    """All classes of length <= max_len for a given d, with the exact weighted
    count invariant sum(2k/h) = a(d,k) verified at build time."""

    d: int
    max_len: int
    classes: dict[int, list[Word]]

    @classmethod
    def build(cls, d: int, max_len: int, *, budget: int = 5_000_000) -> "WordClassTable":
        classes = {}
        for k in range(1, max_len + 1):
            cl = enumerate_classes(d, k, budget=budget)
            weighted = sum(w.orbit_size() for w in cl)
            if weighted != a_count(d, k):
                raise AssertionError(
                    f"class table invariant broken at d={d}, k={k}: {weighted} != {a_count(d, k)}"
                )
            classes[k] = cl
        return cls(d=d, max_len=max_len, classes=classes)

    def all_words(self) -> list[Word]:
        return [w for k in sorted(self.classes) for w in self.classes[k]]


@lru_cache(maxsize=None)
def word_class_table(d: int, max_len: int) -> WordClassTable:
    """Cached table; safe to share since tables are read-only after build."""
    return WordClassTable.build(d, max_len)


def render(w: Word) -> str:
    """Text form like ``p2.P1.p2.p1.p2.P3`` (lowercase +1, uppercase inverse)."""
    return str(w)


def parse_word(text: str) -> Word:
    """Inverse of :func:`render`, canonicalizing the result."""
    letters = []
    for tok in text.strip().split("."):
        if len(tok) < 2 or tok[0] not in "pP":
            raise ValueError(f"bad letter token {tok!r}")
        letters.append(Letter(int(tok[1:]), 1 if tok[0] == "p" else -1))
    return canonical(letters)
