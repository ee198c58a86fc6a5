"""Eigenvalue statistics of the 2d-regular multigraph: the scaled spectrum,
the Chebyshev-based polynomials whose traces count cyclically non-backtracking
walks exactly, and the Mobius-inverted basis whose traces recover cycle counts
on tangle-free graphs.

With eigenvalues lambda_i of A / (2 sqrt(2d-1)):

    sum_i Gamma_k(lambda_i) = (2d-1)^(-k/2) * CNBW_k      (exact, all graphs)
    sum_i f_k(lambda_i)     = C_k          ((k,k) tangle-free graphs)
"""

from __future__ import annotations

import dataclasses
import math
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from rrgfield.cycles import MultiGraph, cnbw_counts

Scalar = Union[int, float, Fraction]

MAX_DEGREE = 64


@dataclasses.dataclass(frozen=True)
class PolynomialCoeffs:
    """Coefficients c_0..c_deg, trailing coefficient nonzero (unless zero)."""

    coefficients: tuple[Scalar, ...]

    def __post_init__(self) -> None:
        coeffs = self.coefficients
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "coefficients", coeffs)
        if self.degree > MAX_DEGREE:
            raise ValueError(f"degree {self.degree} exceeds cap {MAX_DEGREE}")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        acc = 0.0
        for c in reversed(self.coefficients):
            acc = acc * x + float(c)
        return acc

    def scale(self, a: Scalar) -> "PolynomialCoeffs":
        return PolynomialCoeffs(tuple(a * c for c in self.coefficients))

    def add(self, other: "PolynomialCoeffs") -> "PolynomialCoeffs":
        n = max(len(self.coefficients), len(other.coefficients))
        out = [0] * n
        for i, c in enumerate(self.coefficients):
            out[i] = out[i] + c
        for i, c in enumerate(other.coefficients):
            out[i] = out[i] + c
        return PolynomialCoeffs(tuple(out))


def chebyshev_T(k: int) -> PolynomialCoeffs:
    """First-kind Chebyshev polynomial, exact integer coefficients."""
    if k < 0:
        raise ValueError("k must be >= 0")
    prev = [1]
    if k == 0:
        return PolynomialCoeffs((1,))
    cur = [0, 1]
    for _ in range(k - 1):
        nxt = [0] + [2 * c for c in cur]
        for i, c in enumerate(prev):
            nxt[i] -= c
        prev, cur = cur, nxt
    return PolynomialCoeffs(tuple(cur))


def gamma_poly(k: int, d: int) -> PolynomialCoeffs:
    """Gamma_0 = 1; Gamma_2k = 2 T_2k + (2d-2)/(2d-1)^k; Gamma_2k+1 = 2 T_2k+1."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return PolynomialCoeffs((1,))
    base = chebyshev_T(k).scale(2)
    if k % 2 == 0:
        const = Fraction(2 * d - 2, (2 * d - 1) ** (k // 2))
        return base.add(PolynomialCoeffs((const,)))
    return base


def mobius(n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    result = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    if n > 1:
        result = -result
    return result


def f_basis(k: int, d: int) -> PolynomialCoeffs:
    """f_k = (1/2k) sum_{j|k} mu(k/j) (2d-1)^(j/2) Gamma_j.

    Normalized so that sum_i f_k(lambda_i) equals the k-cycle count exactly on
    (k,k) tangle-free graphs; degree k with nonzero leading coefficient.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    q = 2 * d - 1
    acc = PolynomialCoeffs((0,))
    for j in range(1, k + 1):
        if k % j == 0:
            acc = acc.add(gamma_poly(j, d).scale(mobius(k // j) * q ** (j / 2.0)))
    return acc.scale(1.0 / (2 * k))


def scaled_eigenvalues(g: MultiGraph, d: int | None = None) -> np.ndarray:
    """Eigenvalues of A / (2 sqrt(2d-1)), descending; loops count 2 on the
    diagonal and the Perron value is d / sqrt(2d-1)."""
    if d is None:
        d = g.d
    a = g.adjacency().astype(np.float64)
    if not np.array_equal(a, a.T):
        raise ValueError("adjacency is not symmetric: graph construction bug")
    vals = np.linalg.eigvalsh(a) / (2.0 * math.sqrt(2 * d - 1))
    return vals[::-1]


def trace_gamma(
    g: MultiGraph, k: int, d: int | None = None, evals: np.ndarray | None = None
) -> float:
    """sum_i Gamma_k(lambda_i); equals (2d-1)^(-k/2) CNBW_k to ~1e-6."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if d is None:
        d = g.d
    if evals is None:
        evals = scaled_eigenvalues(g, d)
    return float(np.sum(gamma_poly(k, d)(evals)))


def expand_in_gamma(poly: PolynomialCoeffs, d: int) -> list[float]:
    """Coefficients c_j with poly = sum_j c_j Gamma_j (Gamma_j has degree j and
    leading coefficient 2^j for j >= 1)."""
    coeffs = [float(c) for c in poly.coefficients]
    out = [0.0] * len(coeffs)
    gammas = [gamma_poly(j, d) for j in range(len(coeffs))]
    for j in range(len(coeffs) - 1, 0, -1):
        lead = float(gammas[j].coefficients[-1])
        c = coeffs[j] / lead
        out[j] = c
        for i, gc in enumerate(gammas[j].coefficients):
            coeffs[i] -= c * float(gc)
    out[0] = coeffs[0]
    return out


def trace_adjusted(
    g: MultiGraph,
    poly: PolynomialCoeffs,
    d: int | None = None,
    walk_counts: Sequence[int] | None = None,
) -> float:
    """Trace of poly with the constant term adjusted: expand in the Gamma
    basis and evaluate through CNBW counts, dropping the Gamma_0 component."""
    if d is None:
        d = g.d
    cs = expand_in_gamma(poly, d)
    kmax = len(cs) - 1
    if walk_counts is None:
        walk_counts = cnbw_counts(g, kmax) if kmax >= 1 else []
    q = 2 * d - 1
    return sum(cs[j] * q ** (-j / 2.0) * walk_counts[j - 1] for j in range(1, kmax + 1))


@dataclasses.dataclass
class SpectralReport:
    """Per-k trace statistics of one graph against its CNBW counts."""

    d: int
    n: int
    eigenvalues: np.ndarray
    ks: list[int]
    trace_gammas: list[float]
    cnbws: list[int]
    residuals: list[float]
    f_traces: list[float]

    @property
    def max_residual(self) -> float:
        return max(abs(r) for r in self.residuals)


def spectral_report(g: MultiGraph, kmax: int, d: int | None = None) -> SpectralReport:
    if d is None:
        d = g.d
    evals = scaled_eigenvalues(g, d)
    walks = cnbw_counts(g, kmax)
    q = 2 * d - 1
    ks, tgs, resid, ftr = [], [], [], []
    for k in range(1, kmax + 1):
        tg = trace_gamma(g, k, d, evals)
        ks.append(k)
        tgs.append(tg)
        resid.append(tg - q ** (-k / 2.0) * walks[k - 1])
        ftr.append(float(np.sum(f_basis(k, d)(evals))))
    return SpectralReport(
        d=d, n=g.n, eigenvalues=evals, ks=ks, trace_gammas=tgs,
        cnbws=walks, residuals=resid, f_traces=ftr,
    )
