"""Discrete-event simulation of the update network with exact age accounting.

Servers share no queue state, so each server's event sequence (its merged
Poisson arrivals and its service completions) is generated independently and
the resulting deliveries are merged into one time-ordered stream for the
monitor. Per-source age is the exact integral of the piecewise-linear
sawtooth, never a sampled approximation.

Randomness comes from counter-based keyed streams: one per (source, server)
arrival process and one per server's service process, so any one stream's
draws are identical no matter what the rest of the system does.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import NetworkConfig, QueueDiscipline, validate

_Z95 = 1.96
_MASK64 = (1 << 64) - 1


@dataclass
class SimParams:
    """One simulation run: a config plus horizon/seed/averaging controls.

    warmup defaults to 1% of the horizon; statistics cover (warmup, horizon].
    """

    config: NetworkConfig
    horizon: float
    seed: int = 0
    warmup: float | None = None
    batches: int = 32


@dataclass
class SimResult:
    """Per-source time-averaged age with a 95% interval, plus window counters.

    Counters cover the post-warmup window: `deliveries` updates reached the
    monitor, `useful_deliveries` of them carried a fresher generation time
    than the monitor had, the rest are `discarded_stale`. When `replications`
    is above one, ages are means over replications and the interval comes
    from between-replication variance.
    """

    aoi: tuple[float, ...]
    ci_half_width: tuple[float, ...]
    deliveries: int
    useful_deliveries: int
    discarded_stale: int
    seed: int
    horizon: float
    warmup: float
    replications: int = 1


def _stream(seed: int, sid: int) -> np.random.Generator:
    key = np.array([seed & _MASK64, sid & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _poisson_times(rng: np.random.Generator, rate: float, horizon: float) -> np.ndarray:
    """All event times of a Poisson process in (0, horizon]."""
    if rate <= 0.0:
        return np.empty(0)
    expected = rate * horizon
    chunk = int(expected + 10.0 * math.sqrt(expected + 1.0)) + 16
    pieces = []
    last = 0.0
    while last <= horizon:
        cum = np.cumsum(rng.exponential(1.0 / rate, size=chunk)) + last
        pieces.append(cum)
        last = float(cum[-1])
    t = np.concatenate(pieces)
    return t[t <= horizon]


def _deliveries_lcfs_s(t, src, svc_rng, mu, horizon):
    # every arrival enters service at once; it survives iff it finishes
    # before the next arrival preempts it
    svc = svc_rng.exponential(1.0 / mu, size=t.size)
    if t.size == 0:
        return t, t, src
    nxt = np.empty_like(t)
    nxt[:-1] = t[1:]
    nxt[-1] = np.inf
    done = t + svc
    keep = (done <= nxt) & (done <= horizon)
    return done[keep], t[keep], src[keep]


def _deliveries_fcfs(t, src, svc_rng, mu, horizon):
    svc = svc_rng.exponential(1.0 / mu, size=t.size)
    if t.size == 0:
        return t, t, src
    tot = np.cumsum(svc)
    # done_k = max over j<=k of (t_j + svc_j + ... + svc_k)
    done = tot + np.maximum.accumulate(t - (tot - svc))
    keep = done <= horizon
    return done[keep], t[keep], src[keep]


def _deliveries_lcfs_w(t, src, svc_rng, mu, horizon):
    svc = svc_rng.exponential(1.0 / mu, size=t.size)  # consumed per service start
    out_t: list[float] = []
    out_g: list[float] = []
    out_s: list[int] = []
    busy_until = 0.0
    cur_g = 0.0
    cur_s = -1
    waiter: tuple[float, int] | None = None
    idle = True
    si = 0
    for tk, sk in zip(t.tolist(), src.tolist()):
        while not idle and busy_until <= tk:
            out_t.append(busy_until)
            out_g.append(cur_g)
            out_s.append(cur_s)
            if waiter is None:
                idle = True
            else:
                cur_g, cur_s = waiter
                waiter = None
                busy_until += svc[si]
                si += 1
        if idle:
            cur_g, cur_s = tk, sk
            busy_until = tk + svc[si]
            si += 1
            idle = False
        else:
            waiter = (tk, sk)  # newest arrival displaces any older waiter
    while not idle and busy_until <= horizon:
        out_t.append(busy_until)
        out_g.append(cur_g)
        out_s.append(cur_s)
        if waiter is None:
            idle = True
        else:
            cur_g, cur_s = waiter
            waiter = None
            busy_until += svc[si]
            si += 1
    return np.asarray(out_t), np.asarray(out_g), np.asarray(out_s, dtype=int)


_ENGINES = {
    QueueDiscipline.LCFS_S: _deliveries_lcfs_s,
    QueueDiscipline.LCFS_W: _deliveries_lcfs_w,
    QueueDiscipline.FCFS: _deliveries_fcfs,
}


def _integrate_source(dt, dg, warmup, horizon, batches):
    """Exact sawtooth statistics for one source given its delivery stream.

    dt/dg are this source's delivery and generation times in delivery order
    over the whole run; the monitor starts fresh (generation 0) at time 0.
    """
    prev = np.maximum.accumulate(np.concatenate(([0.0], dg)))[:-1]
    useful = dg > prev
    in_window = dt > warmup
    n_deliveries = int(in_window.sum())
    n_useful = int((useful & in_window).sum())

    t_useful = dt[useful]
    g_useful = dg[useful]
    edges = warmup + (horizon - warmup) * np.arange(batches + 1) / batches
    inner = (t_useful > warmup) & (t_useful < horizon)
    cuts = np.sort(np.concatenate([edges, t_useful[inner]]))
    left = cuts[:-1]
    right = cuts[1:]
    # generation level active at each segment's left edge
    level_t = np.concatenate(([0.0], t_useful))
    level_g = np.concatenate(([0.0], g_useful))
    g = level_g[np.searchsorted(level_t, left, side="right") - 1]
    contrib = 0.5 * ((right - g) ** 2 - (left - g) ** 2)
    bidx = np.clip(np.searchsorted(edges, left, side="right") - 1, 0, batches - 1)
    per_batch = np.bincount(bidx, weights=contrib, minlength=batches)
    width = (horizon - warmup) / batches
    means = per_batch / width
    aoi = float(per_batch.sum() / (horizon - warmup))
    ci = float(_Z95 * means.std(ddof=1) / math.sqrt(batches))
    return aoi, ci, n_deliveries, n_useful


def simulate(params: SimParams) -> SimResult:
    """Run one simulation; deterministic given (config, horizon, seed, warmup, batches)."""
    cfg = params.config
    problems = validate(cfg)
    if problems:
        raise ValueError("; ".join(problems))
    horizon = float(params.horizon)
    if not (math.isfinite(horizon) and horizon > 0):
        raise ValueError("horizon must be finite and > 0")
    warmup = 0.01 * horizon if params.warmup is None else float(params.warmup)
    if not (0.0 <= warmup < horizon):
        raise ValueError("warmup must satisfy 0 <= warmup < horizon")
    if params.batches < 2:
        raise ValueError("need at least 2 batches for an interval")
    seed = int(params.seed)
    m, n = cfg.sources, cfg.servers
    if cfg.discipline is QueueDiscipline.FCFS:
        for j in range(n):
            load = sum(cfg.arrival_rates[i][j] for i in range(m))
            if load >= cfg.service_rates[j]:
                raise ValueError(
                    f"server {j} is unstable under fcfs: "
                    f"arrival rate {load:g} >= service rate {cfg.service_rates[j]:g}"
                )

    engine = _ENGINES[cfg.discipline]
    all_t, all_g, all_s = [], [], []
    for j in range(n):
        times = []
        labels = []
        for i in range(m):
            rate = cfg.arrival_rates[i][j]
            if rate > 0.0:
                t = _poisson_times(_stream(seed, i * n + j), rate, horizon)
                times.append(t)
                labels.append(np.full(t.size, i, dtype=int))
        if times:
            t = np.concatenate(times)
            s = np.concatenate(labels)
            order = np.argsort(t, kind="stable")
            t, s = t[order], s[order]
        else:
            t = np.empty(0)
            s = np.empty(0, dtype=int)
        d, g, ds = engine(t, s, _stream(seed, m * n + j), cfg.service_rates[j], horizon)
        all_t.append(d)
        all_g.append(g)
        all_s.append(ds)

    dt = np.concatenate(all_t)
    dg = np.concatenate(all_g)
    dsrc = np.concatenate(all_s)
    order = np.argsort(dt, kind="stable")
    dt, dg, dsrc = dt[order], dg[order], dsrc[order]

    aois, cis = [], []
    deliveries = useful = 0
    for i in range(m):
        mask = dsrc == i
        a, c, nd, nu = _integrate_source(
            dt[mask], dg[mask], warmup, horizon, params.batches
        )
        aois.append(a)
        cis.append(c)
        deliveries += nd
        useful += nu
    return SimResult(
        aoi=tuple(aois),
        ci_half_width=tuple(cis),
        deliveries=deliveries,
        useful_deliveries=useful,
        discarded_stale=deliveries - useful,
        seed=seed,
        horizon=horizon,
        warmup=warmup,
    )


def replicate(params: SimParams, replications: int) -> SimResult:
    """Pool `replications` independent runs seeded seed, seed+1, ...

    Ages are averaged per source; the interval is the 95% normal interval of
    the replication mean, so it shrinks like 1/sqrt(replications). Counters
    are summed.
    """
    if not isinstance(replications, int) or replications < 1:
        raise ValueError("replications must be a positive integer")
    if replications == 1:
        return simulate(params)
    runs = []
    for r in range(replications):
        p = SimParams(
            config=params.config,
            horizon=params.horizon,
            seed=int(params.seed) + r,
            warmup=params.warmup,
            batches=params.batches,
        )
        runs.append(simulate(p))
    per_source = np.array([run.aoi for run in runs])  # (reps, sources)
    mean = per_source.mean(axis=0)
    ci = _Z95 * per_source.std(axis=0, ddof=1) / math.sqrt(replications)
    return SimResult(
        aoi=tuple(float(x) for x in mean),
        ci_half_width=tuple(float(x) for x in ci),
        deliveries=sum(r.deliveries for r in runs),
        useful_deliveries=sum(r.useful_deliveries for r in runs),
        discarded_stale=sum(r.discarded_stale for r in runs),
        seed=int(params.seed),
        horizon=float(params.horizon),
        warmup=runs[0].warmup,
        replications=replications,
    )
