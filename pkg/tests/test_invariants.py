"""Cross-module invariants that the modules promise jointly."""

import math

import numpy as np
from scipy import stats as sstats

from rrgfield import dynamics as D
from rrgfield import limitfield as L
from rrgfield import tower as T
from rrgfield import words as W
from rrgfield.harness import chi2_gof_pvalue


class TestOrbitCanonicalization:
    def test_exhaustive_orbit_invariance(self):
        # every element of every orbit canonicalizes to the class representative
        for d, kmax in ((1, 6), (2, 5), (3, 4)):
            for k in range(1, kmax + 1):
                for w in W.enumerate_classes(d, k):
                    for seq in w.orbit():
                        assert W.canonical(seq) == w

    def test_every_reduced_sequence_covered_once(self):
        for d, k in ((2, 5), (3, 4)):
            classes = W.enumerate_classes(d, k)
            seen: set[tuple[int, ...]] = set()
            for w in classes:
                orbit = w.orbit()
                assert not (orbit & seen)
                seen |= orbit
            assert len(seen) == W.a_count(d, k)


class TestPermutationIndependenceUnderEvolution:
    def test_joint_law_product_uniform(self):
        # after evolving, (sigma_s pi_1, sigma_s pi_2) is uniform on S_3 x S_3
        rng = np.random.default_rng(61)
        cells: dict[tuple[bytes, bytes], int] = {}
        reps = 72_000
        for _ in range(reps):
            p1 = T.Permutation.uniform(3, rng)
            p2 = T.Permutation.uniform(3, rng)
            log = D.evolve(3, 0.6, rng)
            sig = D.sigma_at(log, 0.6).mapping
            key = (sig[p1.mapping].tobytes(), sig[p2.mapping].tobytes())
            cells[key] = cells.get(key, 0) + 1
        assert len(cells) == 36
        probs = np.full(36, 1 / 36)
        assert chi2_gof_pvalue(np.array(list(cells.values())), probs) > 1e-3


class TestFrontReversibility:
    def _paths(self, reps: int, horizon: float, seed: int):
        """Event paths of the p1.p1 count at dimension zero (birth rate 2,
        per-atom death rate 4), extracted from the chi sampler."""
        w = W.parse_word("p1.p1")
        lam, mu = L.bd_generator(w)
        tab = L.chain_tables(2, 2)
        wid = tab.id_of(w)
        paths = []
        for r in range(reps):
            rng = np.random.default_rng(seed + r)
            events = []
            for a in L.sample_chi(2, 2, horizon, rng, tab):
                if a.word_id != wid:
                    continue
                if a.z > 0:
                    events.append((a.z, +1))
                if a.z + a.v < horizon:
                    events.append((a.z + a.v, -1))
            events.sort()
            paths.append(events)
        return paths

    def test_holding_times_forward_equals_reversed(self):
        horizon = 6.0
        paths = self._paths(500, horizon, 8_000)
        fwd, rev = [], []
        for events in paths:
            times = [t for t, _ in events]
            gaps = np.diff([0.0] + times + [horizon])
            fwd.extend(gaps)
            rev.extend(gaps[::-1])
        # same multiset by construction; the law test compares forward gaps
        # against gaps of an independent reversed ensemble
        other = self._paths(500, horizon, 9_000)
        rev_other = []
        for events in other:
            times = [horizon - t for t, _ in reversed(events)]
            rev_other.extend(np.diff([0.0] + times + [horizon]))
        stat = sstats.ks_2samp(fwd, rev_other)
        assert stat.pvalue > 1e-3

    def test_jump_direction_balance(self):
        # reversibility swaps births and deaths; their counts per path agree
        # in law, so the pooled up-fraction is 1/2 within MC error
        paths = self._paths(800, 5.0, 10_000)
        ups = sum(sum(1 for _, sgn in ev if sgn > 0) for ev in paths)
        total = sum(len(ev) for ev in paths)
        se = 0.5 / math.sqrt(total)
        assert abs(ups / total - 0.5) < 3 * se
