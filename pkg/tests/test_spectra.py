import math
from fractions import Fraction

import numpy as np
import pytest

from rrgfield import cycles as C
from rrgfield import spectra as S
from rrgfield import tower as T
from rrgfield import words as W


def random_graph(n: int, d: int, seed: int) -> C.MultiGraph:
    rng = np.random.default_rng(seed)
    return C.build_graph([T.Permutation.uniform(n, rng) for _ in range(d)])


class TestPolynomials:
    def test_chebyshev_values(self):
        assert S.chebyshev_T(0).coefficients == (1,)
        assert S.chebyshev_T(1).coefficients == (0, 1)
        assert S.chebyshev_T(2).coefficients == (-1, 0, 2)
        assert S.chebyshev_T(3).coefficients == (0, -3, 0, 4)

    def test_chebyshev_cos_identity(self):
        for k in range(0, 12):
            for theta in (0.3, 1.1, 2.0):
                assert S.chebyshev_T(k)(math.cos(theta)) == pytest.approx(
                    math.cos(k * theta), abs=1e-9
                )

    def test_gamma_values(self):
        assert S.gamma_poly(0, 2).coefficients == (1,)
        assert S.gamma_poly(2, 1).coefficients == (Fraction(-2), 0, 4)
        g22 = S.gamma_poly(2, 2)
        assert g22.coefficients == (Fraction(-2) + Fraction(2, 3), 0, 4)
        assert S.gamma_poly(3, 2).coefficients == S.chebyshev_T(3).scale(2).coefficients

    def test_mobius(self):
        assert [S.mobius(n) for n in range(1, 13)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0]

    def test_f_basis_low_orders(self):
        f1 = S.f_basis(1, 2)
        assert f1.degree == 1
        assert float(f1.coefficients[1]) == pytest.approx(math.sqrt(3))
        f2 = S.f_basis(2, 2)
        ref = S.gamma_poly(2, 2).scale(3.0).add(S.gamma_poly(1, 2).scale(-math.sqrt(3))).scale(0.25)
        assert np.allclose([float(c) for c in f2.coefficients],
                           [float(c) for c in ref.coefficients])

    def test_f_basis_degree_and_leading(self):
        for k in range(1, 9):
            f = S.f_basis(k, 2)
            assert f.degree == k and float(f.coefficients[-1]) != 0.0

    def test_degree_cap(self):
        with pytest.raises(ValueError):
            S.PolynomialCoeffs(tuple([0] * 65 + [1]))


class TestScaledEigenvalues:
    def test_loop(self):
        g = C.build_graph([T.Permutation.identity(1)])
        assert np.allclose(S.scaled_eigenvalues(g), [1.0])

    def test_double_edge(self):
        g = C.build_graph([T.Permutation.from_cycles(2, [(1, 2)])])
        assert np.allclose(S.scaled_eigenvalues(g), [1.0, -1.0])

    def test_perron_value(self):
        for d in (1, 2, 3):
            g = random_graph(40, d, d)
            vals = S.scaled_eigenvalues(g)
            assert vals[0] == pytest.approx(d / math.sqrt(2 * d - 1), abs=1e-9)
            assert np.all(np.diff(vals) <= 1e-12)

    def test_eigen_residual(self):
        g = random_graph(60, 2, 9)
        a = g.adjacency().astype(float)
        vals, vecs = np.linalg.eigh(a)
        for i in (0, 30, 59):
            r = np.linalg.norm(a @ vecs[:, i] - vals[i] * vecs[:, i])
            assert r <= 1e-9 * max(1.0, abs(vals[i]))


class TestTraceIdentity:
    def test_small_examples(self):
        g = C.build_graph([T.Permutation.identity(1)])
        assert S.trace_gamma(g, 1) == pytest.approx(2.0, abs=1e-12)
        g2 = C.build_graph([T.Permutation.from_cycles(2, [(1, 2)])])
        assert S.trace_gamma(g2, 2) == pytest.approx(4.0, abs=1e-12)

    @pytest.mark.parametrize("d,n", [(1, 60), (2, 80), (3, 50)])
    def test_random_graphs(self, d, n):
        g = random_graph(n, d, 31 * d + n)
        rep = S.spectral_report(g, 10)
        assert rep.max_residual < 1e-6

    def test_f_trace_equals_cycle_count_when_tangle_free(self):
        table = W.WordClassTable.build(2, 3)
        hits = 0
        for seed in range(12):
            g = random_graph(1200, 2, 600 + seed)
            if not C.is_tangle_free(g, 3, 3):
                continue
            hits += 1
            rep = S.spectral_report(g, 3)
            counts = C.count_cycles_by_class(g, table)
            for k in range(1, 4):
                ck = sum(v for w, v in counts.items() if w.length == k)
                assert rep.f_traces[k - 1] == pytest.approx(ck, abs=1e-6)
            if hits >= 2:
                break
        assert hits >= 1


class TestGammaExpansion:
    def test_roundtrip(self):
        poly = S.PolynomialCoeffs((0.3, -1.0, 2.5, 0.7, 1.2))
        cs = S.expand_in_gamma(poly, 2)
        acc = S.PolynomialCoeffs((0.0,))
        for j, cj in enumerate(cs):
            acc = acc.add(S.gamma_poly(j, 2).scale(cj))
        assert np.allclose([float(c) for c in acc.coefficients],
                           [float(c) for c in poly.coefficients])

    def test_trace_adjusted_matches_f_contract(self):
        # tr-hat of f_k computed through CNBW equals the eigenvalue trace of
        # f_k (whose Gamma_0 component is zero by construction)
        g = random_graph(80, 2, 777)
        evals = S.scaled_eigenvalues(g)
        for k in (1, 2, 3, 4):
            f = S.f_basis(k, 2)
            via_walks = S.trace_adjusted(g, f)
            via_evals = float(np.sum(f(evals)))
            assert via_walks == pytest.approx(via_evals, abs=1e-6)

    def test_constant_term_dropped(self):
        g = random_graph(30, 2, 778)
        shifted = S.PolynomialCoeffs((5.0, 0.0, 1.0))
        plain = S.PolynomialCoeffs((0.0, 0.0, 1.0))
        assert S.trace_adjusted(g, shifted) == pytest.approx(
            S.trace_adjusted(g, plain), abs=1e-9
        )


class TestVarianceTrend:
    def test_tr_chebyshev_variance_approaches_half_k(self):
        # Var tr T_k -> k/2 as d grows (the U/2 field); loose trend check
        k = 2
        devs = {}
        for d in (5, 20):
            vals = []
            for seed in range(160):
                g = random_graph(400, d, 9000 + 13 * d + seed)
                evals = S.scaled_eigenvalues(g)
                vals.append(float(np.sum(S.chebyshev_T(k)(evals))))
            devs[d] = abs(np.var(vals, ddof=1) - k / 2) / (k / 2)
        assert devs[20] < devs[5] + 0.15
        assert devs[20] < 0.35
