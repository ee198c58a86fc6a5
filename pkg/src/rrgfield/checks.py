"""The harness operations: each run_* executes one validation experiment and
returns StatReports.  Per-replica workers live at module level so the work
queue can ship them to processes; every worker derives its randomness from
replica_rng(seed, stream, replica) only.
"""

from __future__ import annotations

import math
from collections import defaultdict

import numpy as np

from rrgfield import cycles as cyc
from rrgfield import dynamics as dyn
from rrgfield import limitfield as lf
from rrgfield import spectra as spec
from rrgfield import tower as twr
from rrgfield import trackers as trk
from rrgfield import words as wds
from rrgfield.harness import (
    STREAM_BD,
    STREAM_COV_FINITE,
    STREAM_COV_PPP,
    STREAM_DUALITY,
    STREAM_GAUSS,
    STREAM_HALVING,
    STREAM_POISSON,
    STREAM_SPECTRA,
    ExperimentConfig,
    StatReport,
    absolute_report,
    cov_with_se,
    corr_with_se,
    ks_normal,
    mean_se,
    replica_rng,
    run_replicated,
    three_se_report,
    tv_poisson,
)

# ---------------------------------------------------------------- poisson ---


def _poisson_worker(cfg: ExperimentConfig, r: int) -> np.ndarray:
    rng = replica_rng(cfg.seed, STREAM_POISSON, r)
    maps = [twr.Permutation.uniform(cfg.n, rng).mapping for _ in range(cfg.d)]
    table = wds.word_class_table(cfg.d, cfg.K)
    counts = cyc.count_cycles_by_class(cyc.graph_from_mappings(maps), table)
    return np.array(
        [sum(v for w, v in counts.items() if w.length == k) for k in range(1, cfg.K + 1)]
    )


def run_poisson_check(cfg: ExperimentConfig) -> list[StatReport]:
    """Mean k-cycle counts vs a(d,k)/2k and TV distance to the Poisson law."""
    cfg.validate()
    rows = np.array(run_replicated(_poisson_worker, cfg))
    tv_tol = cfg.tolerances.get("tv", 0.03)
    reports = []
    for k in range(1, cfg.K + 1):
        lam = wds.a_count(cfg.d, k) / (2 * k)
        est, se = mean_se(rows[:, k - 1])
        reports.append(three_se_report(f"poisson mean k={k}", est, se, lam))
        reports.append(
            absolute_report(f"poisson tv k={k}", tv_poisson(rows[:, k - 1], lam), 0.0, tv_tol)
        )
    return reports


# --------------------------------------------------------------- bd rates ---


def _bd_worker(cfg: ExperimentConfig, r: int) -> dict:
    rng = replica_rng(cfg.seed, STREAM_BD, r)
    maps = [twr.Permutation.uniform(cfg.n, rng).mapping for _ in range(cfg.d)]
    table = wds.word_class_table(cfg.d, cfg.kmax)
    acc = trk.run_time_tracker(maps, table, cfg.time_horizon, rng)
    return {
        "deaths": dict(acc.deaths),
        "births": dict(acc.births),
        "alive_time": dict(acc.alive_time),
        "horizon": cfg.time_horizon,
    }


def run_bd_rate_check(cfg: ExperimentConfig) -> list[StatReport]:
    """Empirical death hazard vs 2b(w) and birth rate vs 2b(w)/h(w) for every
    class of length <= kmax; b = 0 classes must be effectively immortal."""
    cfg.validate()
    parts = run_replicated(_bd_worker, cfg)
    deaths: dict = defaultdict(float)
    births: dict = defaultdict(float)
    alive: dict = defaultdict(float)
    total_time = 0.0
    for p in parts:
        total_time += p["horizon"]
        for w, v in p["deaths"].items():
            deaths[w] += v
        for w, v in p["births"].items():
            births[w] += v
        for w, v in p["alive_time"].items():
            alive[w] += v
    rel = cfg.tolerances.get("rate_rel", 0.05)
    reports = []
    for w in wds.word_class_table(cfg.d, cfg.kmax).all_words():
        b, h = w.b, w.h
        t_alive = alive.get(w, 0.0)
        nd = deaths.get(w, 0.0)
        nb = births.get(w, 0.0)
        if b == 0:
            if t_alive > 0:
                haz = nd / t_alive
                reports.append(
                    absolute_report(f"immortal hazard {w}", haz, 0.0, 5.0 / cfg.n,
                                    se=math.sqrt(max(nd, 1.0)) / t_alive)
                )
            continue
        if t_alive <= 0:
            continue  # too few events: reported by omission, not failed
        haz = nd / t_alive
        se_h = math.sqrt(max(nd, 1.0)) / t_alive
        reports.append(
            StatReport(f"death hazard {w}", haz, se_h, 2.0 * b,
                       tolerance=1.0, floor=rel * 2.0 * b)
        )
        rate_b = nb / total_time
        se_b = math.sqrt(max(nb, 1.0)) / total_time
        reports.append(
            StatReport(f"birth rate {w}", rate_b, se_b, 2.0 * b / h,
                       tolerance=1.0, floor=rel * 2.0 * b / h)
        )
    return reports


# --------------------------------------------------------- halving oracle ---


def _halving_worker(cfg: ExperimentConfig, r: int) -> dict | None:
    rng = replica_rng(cfg.seed, STREAM_HALVING, r)
    clock = twr.sample_dimension(cfg.T, rng)
    n = clock.m
    if n < 4:
        return None
    towers = [twr.new_tower(n, rng) for _ in range(cfg.d)]
    maps = [tw.level_mapping(n) for tw in towers]
    table = wds.word_class_table(cfg.d, cfg.L)
    acc = trk.run_backward_tracker(maps, clock.jump_times, cfg.T, cfg.T0, table, cfg.kmax)
    return {"transitions": dict(acc.transitions), "alive_time": dict(acc.alive_time)}


def run_halving_oracle(cfg: ExperimentConfig) -> list[StatReport]:
    """Generator of tracked-cycle evolution backward in dimension vs the
    halving chain rate table built from words.halvings."""
    cfg.validate()
    parts = [p for p in run_replicated(_halving_worker, cfg) if p is not None]
    trans: dict = defaultdict(float)
    alive: dict = defaultdict(float)
    for p in parts:
        for key, v in p["transitions"].items():
            trans[key] += v
        for w, v in p["alive_time"].items():
            alive[w] += v
    tables = lf.chain_tables(cfg.d, cfg.kmax)
    reports = []
    for wid, w in enumerate(tables.words):
        t_alive = alive.get(w, 0.0)
        if t_alive <= 0:
            continue
        moves = dict(tables.halve_moves[wid])
        targets: list[tuple[object, float]] = []
        for tid, mult in moves.items():
            label = "death" if tid == lf.KILLED and w.length == 1 else tables.words[tid]
            targets.append((label, float(mult)))
        kill_rate = float(w.length - w.c)
        if w.length > 1:
            targets.append(("kill", kill_rate))
        for label, ref in targets:
            cnt = trans.get((w, label), 0.0)
            est = cnt / t_alive
            se = math.sqrt(max(cnt, 1.0)) / t_alive
            name = f"halving {w} -> {label}"
            reports.append(three_se_report(name, est, se, ref))
    return reports


# ------------------------------------------------------------- covariance ---

COV_CELLS = [(0.0, 0.0), (0.0, 0.2), (0.0, 0.3), (-0.25, 0.0), (-0.25, 0.1), (-0.25, 0.2)]
COV_PAIRS = [  # (j, cell index a, cell index b)
    (1, 0, 5),
    (2, 0, 2),
    (2, 0, 3),
    (2, 4, 2),
    (3, 0, 1),
    (3, 3, 0),
]
COV_CROSS = [  # (j, k, cell a, cell b); equal dimension, exact zero
    (1, 2, 0, 2),
    (2, 3, 0, 1),
]
_COV_KMAX = 3


def _count_njs(maps: list[np.ndarray], table: wds.WordClassTable) -> np.ndarray:
    counts = cyc.count_cycles_by_class(cyc.graph_from_mappings(maps), table)
    return np.array(
        [sum(v for w, v in counts.items() if w.length == k) for k in range(1, _COV_KMAX + 1)]
    )


def _cov_finite_worker(cfg: ExperimentConfig, r: int) -> np.ndarray:
    rng = replica_rng(cfg.seed, STREAM_COV_FINITE, r)
    state = dyn.FieldState.sample(cfg.d, cfg.T, cfg.S0, rng)
    table = wds.word_class_table(cfg.d, _COV_KMAX)
    out = np.zeros((len(COV_CELLS), _COV_KMAX))
    ss = sorted({s for _, s in COV_CELLS})
    cur = dyn.SigmaCursor(state.log)
    for s in ss:
        cells = [(i, t) for i, (t, sc) in enumerate(COV_CELLS) if sc == s]
        if not cells:
            continue
        cur.advance_to(s)
        sigma = cur.sigma
        removal = sigma[np.arange(state.n, 0, -1)]
        proj = dyn.ProjectionCursor(state.time_mappings(sigma), removal)
        for i, t in sorted(cells, key=lambda it: -it[1]):
            m = state.clock.m_at(cfg.T + t)
            proj.project_to(m)
            out[i] = _count_njs([p.mapping for p in proj.snapshot()], table)
    return out


def _cov_ppp_worker(cfg: ExperimentConfig, r: int) -> np.ndarray:
    rng = replica_rng(cfg.seed, STREAM_COV_PPP, r)
    smp = lf.sample_limit_field(cfg.d, cfg.L, cfg.K, cfg.T0, cfg.S0, cfg.grid, rng)
    out = np.zeros((len(COV_CELLS), _COV_KMAX))
    nks = [smp.n_k(k) for k in range(1, _COV_KMAX + 1)]
    for i, (t, s) in enumerate(COV_CELLS):
        it = int(np.argmin(np.abs(smp.ts - t)))
        js = int(np.argmin(np.abs(smp.ss - s)))
        out[i] = [nk[it, js] for nk in nks]
    return out


def _cov_reports(tag: str, data: np.ndarray, d: int) -> list[StatReport]:
    reports = []
    for j, ia, ib in COV_PAIRS:
        (t1, s1), (t2, s2) = COV_CELLS[ia], COV_CELLS[ib]
        ref = lf.cov_finite_d(d, j, j, t1, s1, t2, s2)
        est, se = cov_with_se(data[:, ia, j - 1], data[:, ib, j - 1])
        reports.append(
            three_se_report(f"cov[{tag}] j={j} ({t1},{s1})x({t2},{s2})", est, se, float(ref))
        )
    for j, k, ia, ib in COV_CROSS:
        (t1, s1), (t2, s2) = COV_CELLS[ia], COV_CELLS[ib]
        est, se = cov_with_se(data[:, ia, j - 1], data[:, ib, k - 1])
        reports.append(
            three_se_report(f"cov[{tag}] cross j={j},k={k} equal t", est, se, 0.0)
        )
    return reports


def run_cov_check(cfg: ExperimentConfig) -> list[StatReport]:
    """Covariances of the finite-graph field and of the PPP limit simulator,
    both against the finite-d closed form (and cross-j zeros)."""
    cfg.validate()
    finite = np.array(run_replicated(_cov_finite_worker, cfg))
    ppp_cfg = ExperimentConfig(
        experiment="cov-ppp", d=cfg.d, K=_COV_KMAX, L=cfg.L, T0=0.25, S0=0.3,
        grid=(2, 4), replicas=cfg.replicas, seed=cfg.seed,
    )
    ppp = np.array(run_replicated(_cov_ppp_worker, ppp_cfg))
    return _cov_reports("graph", finite, cfg.d) + _cov_reports("ppp", ppp, cfg.d)


# ----------------------------------------------------------------- spectra ---


def _spectra_worker(cfg: ExperimentConfig, r: int) -> dict:
    pairs = [(d, n) for d in (1, 2, 3) for n in (50, 200, 500)]
    d, n = pairs[r % len(pairs)]
    rng = replica_rng(cfg.seed, STREAM_SPECTRA, r)
    g = cyc.build_graph([twr.Permutation.uniform(n, rng) for _ in range(d)])
    rep = spec.spectral_report(g, cfg.kmax)
    out = {"d": d, "n": n, "max_residual": rep.max_residual, "f_int": 0.0, "f_cycle": 0.0,
           "tangle_checked": False}
    if d >= 2 and n >= 200:
        kf = 3
        if cyc.is_tangle_free(g, kf, kf):
            table = wds.word_class_table(d, kf)
            counts = cyc.count_cycles_by_class(g, table)
            cks = [sum(v for w, v in counts.items() if w.length == k) for k in range(1, kf + 1)]
            devs = [abs(rep.f_traces[k - 1] - cks[k - 1]) for k in range(1, kf + 1)]
            out["f_cycle"] = max(devs)
            out["f_int"] = max(abs(t - round(t)) for t in rep.f_traces[:kf])
            out["tangle_checked"] = True
    return out


def run_spectra_identity(cfg: ExperimentConfig) -> list[StatReport]:
    """Trace identity residual over random graphs, plus f_k trace = C_k on
    (3,3) tangle-free instances (reported both ways otherwise, no failure)."""
    cfg.validate()
    parts = run_replicated(_spectra_worker, cfg)
    tol = cfg.tolerances.get("residual", 1e-6)
    worst = max(p["max_residual"] for p in parts)
    reports = [absolute_report(f"trace identity max residual (R={len(parts)})", worst, 0.0, tol)]
    tangled = [p for p in parts if p["tangle_checked"]]
    if tangled:
        reports.append(
            absolute_report(f"f_k trace integrality ({len(tangled)} tangle-free graphs)",
                            max(p["f_int"] for p in tangled), 0.0, tol)
        )
        reports.append(
            absolute_report("f_k trace equals cycle count (tangle-free)",
                            max(p["f_cycle"] for p in tangled), 0.0, tol)
        )
    return reports


# -------------------------------------------------------------- gff limits ---


def _gauss_worker(cfg: ExperimentConfig, r: int) -> tuple[float, float]:
    rng = replica_rng(cfg.seed, STREAM_GAUSS, r)
    smp = lf.sample_limit_field(cfg.d, cfg.L, cfg.K, 0.0, cfg.S0, (1, 2), rng)
    x1 = lf.scaled_X(smp, cfg.d, 1)[0, -1]
    x2 = lf.scaled_X(smp, cfg.d, 2)[0, -1]
    return float(x1), float(x2)


def run_gff_limit_check(cfg: ExperimentConfig) -> list[StatReport]:
    """Analytic limit chain (cov_U -> cov_G, Yule exponential limit, tau MGF
    brute force) plus the d = 20 Gaussianity of the PPP field."""
    cfg.validate()
    reports = []
    t0 = 30.0
    us = np.linspace(0.0, 2.0, 5)
    vs = np.linspace(0.0, 4.0, 5)
    sup = 0.0
    for j in (1, 2, 3):
        for u1 in us:
            for u2 in us:
                for v1 in vs:
                    for v2 in vs:
                        a = lf.cov_U(j, -t0 + u1, v1 * math.exp(-t0) / 2,
                                     -t0 + u2, v2 * math.exp(-t0) / 2)
                        sup = max(sup, abs(a - lf.cov_G(j, u1, v1, u2, v2)))
    reports.append(absolute_report("cov_U -> cov_G rescaling sup error", sup, 0.0, 1e-4))
    worst_yule = max(
        abs(lf.yule_mgf(20.0, v * math.exp(-20.0) / 2) - 1.0 / (1.0 + v)) for v in vs
    )
    reports.append(absolute_report("yule mgf exponential limit (theta=20)", worst_yule, 0.0, 1e-6))
    worst_tau = 0.0
    for j in range(1, 11):
        for s in (0.1, 0.35):
            signs = np.array(np.meshgrid(*([[1, -1]] * j))).reshape(j, -1)
            tau = (signs != np.roll(signs, 1, axis=0)).sum(axis=0)
            brute = float(np.exp(2 * s * tau).mean())
            worst_tau = max(worst_tau, abs(brute - lf.tau_mgf(j, s)))
    reports.append(absolute_report("tau mgf vs 2^j brute force", worst_tau, 0.0, 1e-12))

    xs = np.array(run_replicated(_gauss_worker, cfg))
    # exact variance of X_k is 2k a(d,k) (2d-1)^-k (the coincident-point value
    # of the limit covariance); standardize before the normality test
    q = 2 * cfg.d - 1
    sd2 = math.sqrt(4.0 * wds.a_count(cfg.d, 2) / q**2)
    ks = ks_normal(xs[:, 1] / sd2)
    reports.append(absolute_report(f"KS(X_2 standardized, normal) at d={cfg.d}", ks, 0.0,
                                   cfg.tolerances.get("ks", 0.05)))
    var_est, var_se = mean_se((xs[:, 1] / sd2) ** 2)
    reports.append(three_se_report("Var X_2 / (2k a(d,k)(2d-1)^-k)", var_est, var_se, 1.0))
    rho, se = corr_with_se(xs[:, 0], xs[:, 1])
    reports.append(three_se_report("corr(X_1, X_2)", rho, se, 0.0))
    return reports


# ---------------------------------------------------------------- duality ---


def run_duality_check(cfg: ExperimentConfig) -> list[StatReport]:
    """Paired MC check of the halving/doubling duality with indicator test
    functions: q_hat_u(u0, w0)/h(u0) = q_u(w0, u0)/h(w0) at chain time u."""
    cfg.validate()
    u_time = cfg.T0 if cfg.T0 is not None else 0.5
    kcap = cfg.kmax or 3
    tables = lf.chain_tables(cfg.d, kcap)
    R = cfg.replicas
    nw = len(tables.words)
    # halving side: q_u(w0, .) for every w0 at once, vectorized
    rates, slot_cum, slot_tgt = lf._flat_chain_tables(cfg.d, kcap)
    q_h = np.zeros((nw, nw))
    rng = replica_rng(cfg.seed, STREAM_DUALITY, 0)
    for w0 in range(nw):
        state = np.full(R, w0)
        alive = np.ones(R, dtype=bool)
        t_next = rng.standard_exponential(R) / rates[state]
        due = alive & (t_next <= u_time)
        while due.any():
            idx = np.flatnonzero(due)
            st = state[idx]
            rr = rng.random(len(idx))
            choice = (rr[:, None] >= slot_cum[st]).sum(axis=1)
            tgt = slot_tgt[st, choice]
            killed = tgt == lf.KILLED
            alive[idx[killed]] = False
            live = idx[~killed]
            state[live] = tgt[~killed]
            t_next[live] = t_next[live] + rng.standard_exponential(len(live)) / rates[state[live]]
            due = alive & (t_next <= u_time)
        hits = np.bincount(state[alive], minlength=nw)
        q_h[w0] = hits / R
    # doubling side: q_hat_u(u0, .) by per-chain simulation
    q_d = np.zeros((nw, nw))
    for u0 in range(nw):
        word0 = tables.words[u0]
        hits = np.zeros(nw)
        for _ in range(R):
            t = 0.0
            cur = word0
            while True:
                t += rng.exponential(1.0 / cur.length)
                if t > u_time:
                    break
                cur = wds.double_letter(cur, int(rng.integers(1, cur.length + 1)))
                if cur.length > kcap:
                    break
            if cur.length <= kcap and t > u_time:
                hits[tables.id_of(cur)] += 1
        q_d[u0] = hits / R
    reports = []
    for u0 in range(nw):
        for w0 in range(nw):
            if tables.lengths[w0] < tables.lengths[u0]:
                continue
            lhs = q_d[u0, w0] / tables.hs[u0]
            rhs = q_h[w0, u0] / tables.hs[w0]
            se = math.sqrt(
                max(q_d[u0, w0], 1.0 / R) / R / tables.hs[u0] ** 2
                + max(q_h[w0, u0], 1.0 / R) / R / tables.hs[w0] ** 2
            )
            name = f"duality {tables.words[u0]} | {tables.words[w0]}"
            reports.append(three_se_report(name, lhs - rhs, se, 0.0))
    return reports
