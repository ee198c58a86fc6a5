"""Monte Carlo orchestration: experiment configs, pass/fail statistics
reports, deterministic counter-based RNG substreams, a replica work queue,
and shared estimators (means, covariances, Poisson TV distance).

Determinism contract: a (seed, config) pair produces byte-identical outputs
regardless of worker count, because replica r always draws from the Philox
stream keyed by (seed, stream_tag, r) and merges are indexed by r.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Sequence

import numpy as np
from scipy import stats as sstats


def threads_from_env() -> int:
    raw = os.environ.get("RRG_THREADS", "")
    if raw.strip():
        return max(1, int(raw))
    return os.cpu_count() or 1


def replica_rng(seed: int, stream: int, replica: int) -> np.random.Generator:
    """Counter-based substream: Philox keyed by (seed, stream << 40 | replica)."""
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, ((stream << 40) | replica) & 0xFFFFFFFFFFFFFFFF],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


# stream tags, one per experiment family
STREAM_POISSON = 1
STREAM_BD = 2
STREAM_COV_FINITE = 3
STREAM_COV_PPP = 4
STREAM_SPECTRA = 5
STREAM_GAUSS = 6
STREAM_DUALITY = 7
STREAM_HALVING = 8
STREAM_SIMULATE = 9
STREAM_LIMIT = 10


@dataclasses.dataclass
class ExperimentConfig:
    """Canonical, JSON-serializable description of one experiment."""

    experiment: str
    d: int = 2
    n: int | None = None
    T: float | None = None
    T0: float | None = None
    S0: float | None = None
    K: int | None = None
    L: int | None = None
    kmax: int | None = None
    grid: tuple[int, int] | None = None
    replicas: int = 1000
    seed: int = 0
    time_horizon: float | None = None
    tolerances: dict[str, float] = dataclasses.field(default_factory=dict)

    def validate(self) -> None:
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        for name in ("n", "T", "T0", "S0", "K", "L", "kmax", "time_horizon"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be nonnegative")

    def to_json(self) -> str:
        out = dataclasses.asdict(self)
        if out["grid"] is not None:
            out["grid"] = list(out["grid"])
        return json.dumps(out, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        raw = json.loads(text)
        if raw.get("grid") is not None:
            raw["grid"] = tuple(raw["grid"])
        cfg = cls(**raw)
        cfg.validate()
        return cfg


@dataclasses.dataclass
class StatReport:
    """Monte Carlo estimate against a reference value.

    verdict is pass iff |estimate - reference| <= tolerance * max(std_error,
    floor); z_score uses the raw standard error.
    """

    name: str
    estimate: float
    std_error: float
    reference: float
    tolerance: float
    floor: float
    z_score: float = 0.0
    verdict: bool = False
    runtime: float = 0.0

    def __post_init__(self) -> None:
        self.estimate = float(self.estimate)
        self.std_error = float(self.std_error)
        self.reference = float(self.reference)
        diff = self.estimate - self.reference
        self.z_score = diff / self.std_error if self.std_error > 0 else 0.0
        self.verdict = bool(abs(diff) <= self.tolerance * max(self.std_error, self.floor))

    def as_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "estimate": self.estimate,
            "se": self.std_error,
            "reference": self.reference,
            "z": self.z_score,
            "pass": self.verdict,
        }

    def line(self) -> str:
        tag = "PASS" if self.verdict else "FAIL"
        return (
            f"[{tag}] {self.name}: estimate {self.estimate:.6g} "
            f"(se {self.std_error:.3g}) vs reference {self.reference:.6g} "
            f"(z {self.z_score:+.2f})"
        )


def three_se_report(name: str, estimate: float, se: float, reference: float) -> StatReport:
    return StatReport(name=name, estimate=estimate, std_error=se,
                      reference=reference, tolerance=3.0, floor=1e-12)


def absolute_report(name: str, estimate: float, reference: float, threshold: float,
                    se: float = 0.0) -> StatReport:
    """Pass iff |estimate - reference| <= threshold (se reported, not used)."""
    return StatReport(name=name, estimate=estimate, std_error=se,
                      reference=reference, tolerance=1.0, floor=threshold)


def _pool_worker(args: tuple) -> list:
    fn, cfg, lo, hi = args
    return [fn(cfg, r) for r in range(lo, hi)]


def run_replicated(
    fn: Callable[[ExperimentConfig, int], Any],
    cfg: ExperimentConfig,
    threads: int | None = None,
) -> list:
    """fn(cfg, replica) for every replica, merged in replica order.

    fn must be a module-level callable (it crosses process boundaries) and
    must derive all randomness from replica_rng, never shared state.
    """
    n = cfg.replicas
    if threads is None:
        threads = threads_from_env()
    threads = min(threads, n)
    if threads <= 1:
        return [fn(cfg, r) for r in range(n)]
    chunk = max(1, (n + 4 * threads - 1) // (4 * threads))
    jobs = [(fn, cfg, lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
    out: list = [None] * n
    with ProcessPoolExecutor(max_workers=threads) as pool:
        for (_f, _c, lo, hi), res in zip(jobs, pool.map(_pool_worker, jobs)):
            out[lo:hi] = res
    return out


def mean_se(xs: np.ndarray) -> tuple[float, float]:
    xs = np.asarray(xs, dtype=np.float64)
    return float(xs.mean()), float(xs.std(ddof=1) / math.sqrt(len(xs)))


def cov_with_se(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Sample covariance and the moment-based SE of the estimator."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc, yc = x - x.mean(), y - y.mean()
    prod = xc * yc
    n = len(x)
    c = float(prod.sum() / (n - 1))
    se = float(prod.std(ddof=1) / math.sqrt(n))
    return c, se


def corr_with_se(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    c, _ = cov_with_se(x, y)
    sx, sy = np.std(x, ddof=1), np.std(y, ddof=1)
    r = c / (sx * sy)
    return float(r), 1.0 / math.sqrt(len(x))


def tv_poisson(samples: np.ndarray, lam: float, support: int = 20) -> float:
    """Total-variation distance between the empirical law and Poisson(lam) on
    {0..support} with the tail mass folded into the last bin."""
    samples = np.minimum(np.asarray(samples, dtype=np.int64), support)
    emp = np.bincount(samples, minlength=support + 1) / len(samples)
    ref = sstats.poisson.pmf(np.arange(support + 1), lam)
    ref[support] += sstats.poisson.sf(support, lam)
    return 0.5 * float(np.abs(emp - ref).sum())


def ks_normal(xs: np.ndarray) -> float:
    return float(sstats.kstest(xs, "norm").statistic)


def chi2_gof_pvalue(observed: np.ndarray, probs: np.ndarray) -> float:
    """Chi-square goodness of fit of integer category counts vs probabilities."""
    observed = np.asarray(observed, dtype=np.float64)
    expected = probs * observed.sum()
    keep = expected > 0
    stat = float(((observed[keep] - expected[keep]) ** 2 / expected[keep]).sum())
    dof = int(keep.sum()) - 1
    return float(sstats.chi2.sf(stat, dof))


def two_sample_counts_pvalue(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample chi-square on count vectors (cells pooled to expected >= 5)."""
    hi = int(max(a.max(initial=0), b.max(initial=0)))
    ca = np.bincount(a, minlength=hi + 1).astype(float)
    cb = np.bincount(b, minlength=hi + 1).astype(float)
    tot = ca + cb
    # pool sparse upper cells
    order = np.argsort(-tot)
    keep, rest_a, rest_b = [], 0.0, 0.0
    for i in order:
        if tot[i] >= 10:
            keep.append((ca[i], cb[i]))
        else:
            rest_a += ca[i]
            rest_b += cb[i]
    if rest_a + rest_b > 0:
        keep.append((rest_a, rest_b))
    table = np.array(keep).T
    if table.shape[1] < 2:
        return 1.0
    return float(sstats.chi2_contingency(table)[1])


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(str(x) for x in row) + "\n")


def summary_json(experiment: str, params: dict[str, Any], reports: list[StatReport]) -> str:
    return json.dumps(
        {
            "experiment": experiment,
            "params": params,
            "reports": [r.as_dict() for r in reports],
        },
        sort_keys=True,
    )

