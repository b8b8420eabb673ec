"""Monte Carlo oracle for controlled reserve processes.

Compound-Poisson models are simulated exactly: between claims the reserve
moves linearly, so barrier reflection, band payments and creeping ruin all
have closed forms per inter-arrival interval.  Models with a Brownian part
use an Euler scheme.  Within each step the maximum of the Brownian bridge is
drawn exactly, which gives the reflection at a barrier (and hits of a band's
upper level) without discretization error; ruin inside a step is detected
with the bridge crossing probability.

Paths are processed in fixed-size chunks.  Chunk ``j`` draws from a Philox
stream keyed by ``(seed, j)``, and chunk results are combined in index
order, so estimates do not depend on the number of worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .definetti import BarrierPolicy
from .errors import ConfigError, UnsupportedModelError
from .levy import Orientation, ProcessModel
from .transaction import BandPolicy

CHUNK = 8192
DEFAULT_BIAS = 1e-4
DEFAULT_DT = 1e-2


@dataclass(frozen=True)
class SimulationEstimate:
    value_mean: float
    value_se: float
    constraint_mean: float
    constraint_se: float
    n_paths: int
    horizon: float
    truncation_bias_bound: float
    mean_transactions: float = 0.0


def horizon_for(q: float, bias: float = DEFAULT_BIAS) -> float:
    """Horizon ``T`` with ``exp(-q T) = bias``."""
    return math.log(1.0 / bias) / q


def worker_count() -> int:
    """Threads to use: ``RUIN_DIV_THREADS`` if set, else the CPU count."""
    env = os.environ.get("RUIN_DIV_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError([("RUIN_DIV_THREADS", f"not an integer: {env!r}")]) from None
        if n < 1:
            raise ConfigError([("RUIN_DIV_THREADS", "must be at least 1")])
        return n
    return os.cpu_count() or 1


class _Draws:
    """Uniforms and normals for ``k`` active pairs, mirrored when antithetic."""

    def __init__(self, gen, antithetic):
        self.gen = gen
        self.antithetic = antithetic

    def uniform(self, k):
        # values in (0, 1]
        u = 1.0 - self.gen.random(k)
        if self.antithetic:
            return np.concatenate([u, np.maximum(1.0 - u, 1e-300)])
        return u

    def normal(self, k):
        z = self.gen.standard_normal(k)
        return np.concatenate([z, -z]) if self.antithetic else z


def _claims(model, u):
    return model.claims.ppf(1.0 - u) if model.has_jumps else np.zeros_like(u)


def _exp_times(model, u):
    if not model.has_jumps:
        return np.full_like(u, np.inf)
    return -np.log(u) / model.lam


class _State:
    def __init__(self, n, x):
        self.pos = np.full(n, float(x))
        self.t = np.zeros(n)
        self.alive = np.ones(n, dtype=bool)
        self.value = np.zeros(n)
        self.cons = np.zeros(n)
        self.ntx = np.zeros(n)


def _initial_lump(st, policy):
    if isinstance(policy, BarrierPolicy):
        over = st.pos > policy.level
        st.value[over] += st.pos[over] - policy.level
        st.pos[over] = policy.level
    elif isinstance(policy, BandPolicy):
        over = st.pos > policy.upper
        st.value[over] += st.pos[over] - policy.lower - policy.cost
        st.ntx[over] += 1
        st.pos[over] = policy.lower


def _upward_drift(q, c, pos, t, dt, policy):
    """Move reserves up at rate ``c`` for ``dt``; return new positions, discounted payouts and counts."""
    if isinstance(policy, BarrierPolicy):
        b = policy.level
        hit = (b - pos) / c
        paid = np.zeros_like(pos)
        m = dt > hit
        if q > 0:
            paid[m] = c / q * (np.exp(-q * (t[m] + hit[m])) - np.exp(-q * (t[m] + dt[m])))
        return np.minimum(pos + c * dt, b), paid, np.zeros_like(pos)
    if isinstance(policy, BandPolicy):
        lo, hi, beta = policy.lower, policy.upper, policy.cost
        first = (hi - pos) / c
        period = (hi - lo) / c
        m = dt >= first
        new = pos + c * dt
        paid = np.zeros_like(pos)
        count = np.zeros_like(pos)
        if m.any():
            extra = dt[m] - first[m]
            n = np.floor(extra / period) + 1.0
            r = math.exp(-q * period)
            paid[m] = (hi - lo - beta) * np.exp(-q * (t[m] + first[m])) * (-np.expm1(n * math.log(r))) / (1.0 - r)
            count[m] = n
            new[m] = lo + c * (extra - (n - 1.0) * period)
        return new, paid, count
    return pos + c * dt, np.zeros_like(pos), np.zeros_like(pos)


def _upper_payout(st, idx, policy, when, q):
    """Apply an instantaneous barrier or band payment at time ``when`` to paths ``idx``."""
    pos = st.pos[idx]
    disc = np.exp(-q * when)
    if isinstance(policy, BarrierPolicy):
        over = np.maximum(pos - policy.level, 0.0)
        st.value[idx] += disc * over
        st.pos[idx] = np.minimum(pos, policy.level)
    elif isinstance(policy, BandPolicy):
        over = pos > policy.upper
        sel = idx[over]
        st.value[sel] += disc[over] * (pos[over] - policy.lower - policy.cost)
        st.ntx[sel] += 1
        st.pos[sel] = policy.lower


def _reflect_in_step(st, idx, end, peak, policy, disc):
    """Apply payments triggered by the running maximum ``peak`` within a step; return end positions."""
    if isinstance(policy, BarrierPolicy):
        over = np.maximum(peak - policy.level, 0.0)
        st.value[idx] += disc * over
        return end - over
    if isinstance(policy, BandPolicy):
        hit = peak >= policy.upper
        sel = idx[hit]
        st.value[sel] += disc[hit] * (policy.upper - policy.lower - policy.cost)
        st.ntx[sel] += 1
        end = end.copy()
        end[hit] -= policy.upper - policy.lower
        return end
    return end


def _active(st, m, antithetic):
    """Pair indices with a live member and the path indices they cover."""
    if antithetic:
        pairs = np.flatnonzero(st.alive[:m] | st.alive[m:])
        return pairs, np.concatenate([pairs, pairs + m])
    pairs = np.flatnonzero(st.alive)
    return pairs, pairs


def _run_cl(model, q, policy, x, n, T, draws, antithetic):
    st = _State(n, x)
    m = n // 2 if antithetic else n
    _initial_lump(st, policy)
    c = model.c
    dual = model.orientation is Orientation.DUAL
    if dual:
        ruined = st.pos <= 0
        st.cons[ruined] = 1.0
        st.alive[ruined] = False
    while True:
        pairs, idx = _active(st, m, antithetic)
        if pairs.size == 0:
            break
        k = pairs.size
        e = _exp_times(model, draws.uniform(k))
        y = _claims(model, draws.uniform(k))
        live = st.alive[idx]
        idx, e, y = idx[live], e[live], y[live]
        t, pos = st.t[idx], st.pos[idx]
        t_next = t + e
        if not dual:
            new, paid, count = _upward_drift(q, c, pos, t, e, policy)
            st.value[idx] += paid
            st.ntx[idx] += count
            new = new - y
            ruin = new < 0
            st.pos[idx] = new
            st.t[idx] = t_next
            hit = ruin & (t_next <= T)
            st.cons[idx[hit]] = np.exp(-q * t_next[hit])
            st.alive[idx[ruin | (t_next > T)]] = False
        else:
            creep = pos / c if c > 0 else np.full_like(pos, np.inf)
            ruin = e >= creep
            tau = t + creep
            hit = ruin & (tau <= T)
            st.cons[idx[hit]] = np.exp(-q * tau[hit])
            st.alive[idx[ruin]] = False
            ok = ~ruin
            j = idx[ok]
            st.pos[j] = pos[ok] - c * e[ok] + y[ok]
            st.t[j] = t_next[ok]
            _upper_payout(st, j, policy, t_next[ok], q)
            st.alive[j[t_next[ok] > T]] = False
    return st


def _run_diffusion(model, q, policy, x, n, T, dt, draws, antithetic):
    st = _State(n, x)
    m = n // 2 if antithetic else n
    _initial_lump(st, policy)
    sn = model.orientation is Orientation.SPECTRALLY_NEGATIVE
    drift = model.c if sn else -model.c
    jump_sign = -1.0 if sn else 1.0
    sigma = model.sigma
    sq = sigma * math.sqrt(dt)
    ruined = st.pos <= 0
    st.cons[ruined] = 1.0
    st.alive[ruined] = False
    next_jump = np.zeros(n)
    first = True
    while True:
        pairs, idx = _active(st, m, antithetic)
        if pairs.size == 0:
            break
        k = pairs.size
        if first:
            next_jump[:] = _exp_times(model, draws.uniform(m))
            first = False
        z = draws.normal(k)
        ub = draws.uniform(k)
        um = draws.uniform(k)
        live = st.alive[idx]
        idx, z, ub, um = idx[live], z[live], ub[live], um[live]
        t0, pos0 = st.t[idx], st.pos[idx]
        t1 = t0 + dt
        inc = drift * dt + sq * z
        peak = pos0 + 0.5 * (inc + np.sqrt(inc * inc - 2.0 * sigma * sigma * dt * np.log(um)))
        pos1 = _reflect_in_step(st, idx, pos0 + inc, peak, policy, np.exp(-q * (t0 + 0.5 * dt)))
        with np.errstate(over="ignore", divide="ignore"):
            cross = np.exp(-2.0 * np.maximum(pos0, 0.0) * np.maximum(pos1, 0.0) / (sigma * sigma * dt))
        ruin = (pos1 <= 0) | (ub < cross)
        tau = t0 + 0.5 * dt
        hit = ruin & (tau <= T)
        st.cons[idx[hit]] = np.exp(-q * tau[hit])
        st.alive[idx[ruin]] = False
        ok = ~ruin
        j = idx[ok]
        st.pos[j] = pos1[ok]
        st.t[j] = t1[ok]
        _upper_payout(st, j, policy, t1[ok], q)
        # jumps arriving during the step are applied at its end
        while True:
            jumping = j[next_jump[j] <= st.t[j]]
            if jumping.size == 0:
                break
            y = _claims(model, draws.uniform(jumping.size)[: jumping.size])
            e = _exp_times(model, draws.uniform(jumping.size)[: jumping.size])
            next_jump[jumping] += e
            st.pos[jumping] += jump_sign * y
            if sn:
                dead = jumping[st.pos[jumping] < 0]
                when = st.t[dead]
                st.cons[dead] = np.where(when <= T, np.exp(-q * when), 0.0)
                st.alive[dead] = False
                j = j[st.alive[j]]
            else:
                _upper_payout(st, jumping, policy, st.t[jumping], q)
        st.alive[j[st.t[j] > T]] = False
    return st


def _check(model, q, x, n_paths, T, dt, antithetic):
    problems = []
    if model.is_stable:
        raise UnsupportedModelError("stable paths are not simulated; use the closed-form scale functions")
    if not q > 0:
        problems.append(("q", "must be positive"))
    if x < 0:
        problems.append(("x", "initial reserve must be nonnegative"))
    if n_paths < 2:
        problems.append(("n_paths", "need at least two paths"))
    if antithetic and n_paths % 2:
        problems.append(("n_paths", "antithetic sampling needs an even path count"))
    if not (T > 0 and math.isfinite(T)):
        problems.append(("horizon", "must be positive and finite"))
    if not (dt > 0 and dt < T):
        problems.append(("dt", "must lie in (0, horizon)"))
    if problems:
        raise ConfigError(problems)


def _chunk(model, q, policy, x, n, T, dt, seed, index, antithetic):
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))
    draws = _Draws(gen, antithetic)
    if model.sigma > 0:
        st = _run_diffusion(model, q, policy, x, n, T, dt, draws, antithetic)
    else:
        st = _run_cl(model, q, policy, x, n, T, draws, antithetic)
    if antithetic:
        h = n // 2
        return (st.value[:h] + st.value[h:]) / 2, (st.cons[:h] + st.cons[h:]) / 2, st.ntx
    return st.value, st.cons, st.ntx


def simulate_policy(model: ProcessModel, q: float, policy, x: float, n_paths: int = 100_000,
                    T: float | None = None, seed: int = 0, dt: float = DEFAULT_DT,
                    antithetic: bool = False, workers: int | None = None) -> SimulationEstimate:
    """Estimate discounted dividends and ``E_x[exp(-q tau) 1{tau <= T}]`` under ``policy``.

    ``policy`` is a barrier, a band, or ``None`` for paying nothing.
    """
    q, x = float(q), float(x)
    T = horizon_for(q) if T is None else float(T)
    _check(model, q, x, int(n_paths), T, dt, antithetic)
    sizes = [CHUNK] * (n_paths // CHUNK)
    if n_paths % CHUNK:
        sizes.append(n_paths % CHUNK)
    if antithetic and any(s % 2 for s in sizes):
        raise ConfigError([("n_paths", "antithetic chunks need even sizes")])
    jobs = [(model, q, policy, x, s, T, dt, int(seed), i, antithetic) for i, s in enumerate(sizes)]
    workers = min(worker_count() if workers is None else workers, len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda a: _chunk(*a), jobs))
    else:
        parts = [_chunk(*a) for a in jobs]
    value = np.concatenate([p[0] for p in parts])
    cons = np.concatenate([p[1] for p in parts])
    ntx = np.concatenate([p[2] for p in parts])
    k = value.size
    return SimulationEstimate(
        value_mean=float(value.mean()),
        value_se=float(value.std(ddof=1) / math.sqrt(k)),
        constraint_mean=float(cons.mean()),
        constraint_se=float(cons.std(ddof=1) / math.sqrt(k)),
        n_paths=int(n_paths),
        horizon=T,
        truncation_bias_bound=math.exp(-q * T),
        mean_transactions=float(ntx.mean()),
    )


def simulate_do_nothing(model: ProcessModel, q: float, x: float, n_paths: int = 100_000,
                        T: float | None = None, seed: int = 0, dt: float = DEFAULT_DT,
                        antithetic: bool = False, workers: int | None = None) -> SimulationEstimate:
    """Estimate the do-nothing floor ``E_x[exp(-q tau)]``; the value is zero."""
    return simulate_policy(model, q, None, x, n_paths, T, seed, dt, antithetic, workers)
