"""Exact continuous-time dynamics of the interlaced particle system.

Each particle p carries an exponential clock of rate
(1 - q^B_p)(1 - q^(D_p+1)) / (1 - q^(C_p+1)); when it rings, p and the
particles stacked above it through zero up-gaps all shift right by one.
The Gibbs product weight built from q-Pochhammer symbols of the gap counts
is stationary; a brute-force generator over enumerated configurations makes
that checkable to rounding error on small tori.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import (ConfigError, ParameterError, ParticleConfig, _gaps,
                      enumerate_configs, fourier_modes, neighbor_distances)
from .sde import symbol_Q


class DomainError(ValueError):
    pass


def log_q_pochhammer(q: float, n: int) -> float:
    """log of (1-q)(1-q^2)...(1-q^n); 0 for n = 0.  Stable for n up to 1e6."""
    if not 0 <= q < 1:
        raise DomainError(f"q must lie in [0, 1), got {q}")
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if n == 0 or q == 0.0:
        return 0.0
    # factors beyond q^i < 1e-30 contribute less than ~1e-30/(1-q)
    i_max = min(n, int(math.ceil(-69.1 / math.log(q))))
    i = np.arange(1, i_max + 1, dtype=float)
    return float(np.sum(np.log1p(-np.exp(i * math.log(q)))))


def _rate(gaps, q):
    if q == 0.0:
        return 1.0 if gaps.b >= 1 else 0.0
    return (1 - q ** gaps.b) * (1 - q ** (gaps.d + 1)) / (1 - q ** (gaps.c + 1))


def jump_rate(config, p, q: float) -> float:
    """Clock rate of particle p; zero exactly when the diagonal gap b is zero."""
    return _rate(neighbor_distances(config, p), q)


@dataclass(frozen=True)
class RateTable:
    rates: dict
    total: float


def rate_table(config, q) -> RateTable:
    rates = {p: jump_rate(config, p, q) for p in config.torus.labels()}
    return RateTable(rates=rates, total=sum(rates.values()))


def push_set(config, p):
    """Labels moved together with p: follow up-edges while the up-gap f is
    zero, stopping at the first positive gap or on loop closure."""
    torus = config.torus
    cur = torus.canonical(p)
    members = [cur]
    seen = {cur}
    while neighbor_distances(config, cur).f == 0:
        cur = torus.canonical((cur[0], cur[1] + 1))
        if cur in seen:
            break
        members.append(cur)
        seen.add(cur)
    return frozenset(members)


def apply_jump(config, p) -> ParticleConfig:
    """Shift the push set of p right by one; requires a positive rate."""
    if neighbor_distances(config, p).b == 0:
        raise ConfigError(f"zero-rate jump requested at {config.torus.canonical(p)}")
    return config.shifted(push_set(config, p))


@dataclass(frozen=True)
class JumpRecord:
    time: float
    trigger: tuple
    pushed: tuple


@dataclass
class Trajectory:
    torus: object
    q: float
    T: float
    seed: int
    events: list = field(default_factory=list)
    samples: list = field(default_factory=list)      # (time, positions dict)
    displacement: dict = field(default_factory=dict)  # label -> total jumps
    final: ParticleConfig = None


_TOUCH = ((0, 0), (-1, 1), (0, 1), (1, 0))  # labels whose rate reads a moved position


def simulate(config, q, T, seed=0, observe_every=None, debug_validate=False) -> Trajectory:
    """Event-driven simulation: exponential waiting times with the total
    rate, trigger chosen proportionally to individual rates, cascades applied
    atomically.  Deterministic for a given seed.

    observe_every records position snapshots on a regular time grid
    (including t = 0 and t = T).  debug_validate revalidates the state and
    the incremental rate table after every event.
    """
    if T < 0:
        raise ParameterError("T must be >= 0")
    torus = config.torus
    labels = torus.labels()
    positions = dict(config.positions)
    rates = {p: _rate(_gaps(torus, positions, p), q) for p in labels}
    total = sum(rates.values())
    rng = np.random.default_rng(seed)
    traj = Trajectory(torus=torus, q=q, T=T, seed=seed,
                      displacement={p: 0 for p in labels})

    next_obs = 0.0 if observe_every else None
    t = 0.0
    events_since_resync = 0
    while True:
        wait = rng.exponential(1.0 / total) if total > 0 else math.inf
        t_next = t + wait
        while next_obs is not None and next_obs <= min(t_next, T) + 1e-12:
            traj.samples.append((next_obs, dict(positions)))
            next_obs += observe_every
            if next_obs > T + 1e-12:
                next_obs = None
        if t_next > T:
            break
        t = t_next

        u = rng.random() * total
        acc = 0.0
        trigger = None
        for p in labels:
            acc += rates[p]
            if u < acc:
                trigger = p
                break
        if trigger is None:  # rounding at the top of the cumulative sum
            trigger = max(labels, key=lambda p: rates[p])

        cfg = ParticleConfig(torus, positions)
        moved = push_set(cfg, trigger)
        for r in moved:
            positions[r] = (positions[r] + 1) % torus.L
            traj.displacement[r] += 1
        traj.events.append(JumpRecord(time=t, trigger=trigger, pushed=tuple(sorted(moved))))

        touched = {torus.canonical((r[0] + dp[0], r[1] + dp[1]))
                   for r in moved for dp in _TOUCH}
        for p in touched:
            old = rates[p]
            rates[p] = _rate(_gaps(torus, positions, p), q)
            total += rates[p] - old
        events_since_resync += 1
        if events_since_resync >= 1024:
            total = sum(rates.values())
            events_since_resync = 0

        if debug_validate:
            from .lattice import validate
            report = validate(ParticleConfig(torus, positions))
            if not report.ok:
                raise ConfigError(f"invalid state after event at t={t}: {report.failures}")
            fresh = {p: _rate(_gaps(torus, positions, p), q) for p in labels}
            drift = max(abs(fresh[p] - rates[p]) for p in labels)
            if drift > 1e-12:
                raise ConfigError(f"incremental rate table drifted by {drift}")

    traj.final = ParticleConfig(torus, positions)
    return traj


def log_stationary_weight(config, q: float) -> float:
    """Unnormalized log Gibbs weight: sum over particles of
    log(q;q)_a - log(q;q)_b - log(q;q)_c."""
    total = 0.0
    for p in config.torus.labels():
        g = neighbor_distances(config, p)
        total += (log_q_pochhammer(q, g.a)
                  - log_q_pochhammer(q, g.b)
                  - log_q_pochhammer(q, g.c))
    return total


@dataclass(frozen=True)
class GeneratorMatrix:
    states: tuple
    matrix: np.ndarray

    @property
    def n(self):
        return len(self.states)


def build_generator(torus, q) -> GeneratorMatrix:
    """Dense generator over all enumerated configurations of the sector."""
    states = enumerate_configs(torus)
    if not states:
        raise ParameterError("empty configuration space")
    index = {cfg.occupancy(): i for i, cfg in enumerate(states)}
    n = len(states)
    Q = np.zeros((n, n))
    for i, cfg in enumerate(states):
        for p in torus.labels():
            r = jump_rate(cfg, p, q)
            if r <= 0:
                continue
            j = index[apply_jump(cfg, p).occupancy()]
            Q[i, j] += r
            Q[i, i] -= r
    return GeneratorMatrix(states=tuple(states), matrix=Q)


def stationary_distribution(generator, q):
    """Normalized Gibbs weights over the generator's states."""
    logs = np.array([log_stationary_weight(cfg, q) for cfg in generator.states])
    w = np.exp(logs - logs.max())
    return w / w.sum()


def check_stationarity(torus, q) -> float:
    """Max-norm residual of pi^T Q with pi the Gibbs weights; rounding-level
    for the true stationary measure."""
    gen = build_generator(torus, q)
    pi = stationary_distribution(gen, q)
    return float(np.abs(pi @ gen.matrix).max())


def gaussian_log_weight(etas, params, m2, mode="direct") -> float:
    """Quadratic log-weight of a fluctuation field around the crystalline
    state, normalized so that differences match log Gibbs-weight differences
    as the lattice spacing refines.

    mode='direct' evaluates the three gradient-squared sums; mode='fourier'
    evaluates sum_k |hat(eta)_k|^2 Q(k).  The two agree to rounding.
    """
    if isinstance(etas, dict):
        from .sde import SdeState
        m = int(round(math.sqrt(len(etas))))
        etas = SdeState.from_mapping(etas, m, m2).xi
    etas = np.asarray(etas, dtype=float)
    m = etas.shape[-1]
    if mode == "direct":
        from .sde import shift_field
        f = lambda x: math.exp(-x) / -math.expm1(-x)
        gd = etas - shift_field(etas, (1, 0), m2)
        gb = etas - shift_field(etas, (1, -1), m2)
        gc = etas - shift_field(etas, (0, -1), m2)
        return 0.5 * (f(params.D) * float(np.sum(gd ** 2))
                      - f(params.B) * float(np.sum(gb ** 2))
                      - f(params.C) * float(np.sum(gc ** 2)))
    if mode == "fourier":
        modes = fourier_modes(m, m2)
        eta_hat = modes.field_transform(etas)
        qvals = symbol_Q(modes.k, params)
        return float(np.sum(np.abs(eta_hat) ** 2 * qvals))
    raise ParameterError(f"unknown mode {mode!r}")
