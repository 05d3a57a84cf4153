"""Command-line harness: experiment recipes with CSV artifacts.

Subcommands:
    akpz ctmc                particle-system trajectory to CSV
    akpz sde                 Euler-Maruyama trajectories to CSV
    akpz cov                 covariance queries (finite / quad / kernel / asymptotic)
    akpz validate            structural property report for the drift symbol
    akpz oracle-stationarity brute-force stationarity residual
    akpz she-check           scaling limit toward the additive heat equation
    akpz gff                 smoothed-field variance, lattice vs continuum
    akpz run                 run a recipe described by a config file
    akpz all                 run the full verification suite

Exit codes: 0 all checks pass, 1 tolerance failure, 2 usage/config error.
"""

import argparse
import csv
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import correlations as corr
from . import ctmc, lattice, sde
from .correlations import AccuracyError
from .lattice import ParameterError, TorusParams, crystalline
from .sde import ModelError, ModelParams, drift_coeffs, spectral_data
from .specfun import log_qpoch_asymptotic


class ConfigError(ValueError):
    """Malformed experiment configuration."""


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def thread_map(fn, items, threads):
    """Map preserving input order; thread count never changes the result."""
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# experiment configuration files

_SCHEMA = {
    "experiment": str,
    "C": float,
    "D": float,
    "q": float,
    "eps": float,
    "ell": float,
    "L": int,
    "N": int,
    "m1": int,
    "m": int,
    "m2": int,
    "dt": float,
    "T": float,
    "t": float,
    "s": float,
    "replicas": int,
    "seed": int,
    "delta": float,
    "grid": int,
    "tol": float,
    "threads": int,
    "out": str,
}

_RANGES = {
    "C": lambda v: v > 0,
    "D": lambda v: v > 0,
    "q": lambda v: 0 <= v < 1,
    "eps": lambda v: v > 0,
    "dt": lambda v: v > 0,
    "T": lambda v: v >= 0,
    "replicas": lambda v: v >= 1,
    "delta": lambda v: v > 0,
    "grid": lambda v: v >= 2,
    "tol": lambda v: v > 0,
    "threads": lambda v: v >= 1,
}

EXPERIMENTS = ("stationarity-oracle", "drift-check", "sde-vs-exact",
               "cor1-log-growth", "cor2-characteristic", "cor3-she",
               "gff-variance", "qpoch-asymptotics")


@dataclass
class ExperimentConfig:
    experiment: str
    values: dict = field(default_factory=dict)

    def get(self, key, default=None):
        return self.values.get(key, default)


def parse_config(text) -> ExperimentConfig:
    """Strict line-oriented `key = value` parser; rejects unknown keys,
    duplicates, and out-of-range values, reporting line numbers."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        typ = _SCHEMA[key]
        try:
            parsed = typ(val) if typ is not str else val
        except ValueError as err:
            raise ConfigError(f"line {lineno}: bad {typ.__name__} value {val!r} for {key!r}") from err
        if typ is int and not val.lstrip("+-").isdigit():
            raise ConfigError(f"line {lineno}: key {key!r} requires an integer, got {val!r}")
        if key in _RANGES and not _RANGES[key](parsed):
            raise ConfigError(f"line {lineno}: value {parsed} out of range for {key!r}")
        values[key] = parsed
    if "experiment" not in values:
        raise ConfigError("missing required key 'experiment'")
    name = values.pop("experiment")
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
    return ExperimentConfig(experiment=name, values=values)


# ---------------------------------------------------------------------------
# comparison reports

@dataclass
class ReportRow:
    label: str
    value_a: float
    value_b: float
    tolerance: float
    passed: bool

    @property
    def difference(self):
        return self.value_a - self.value_b


@dataclass
class ComparisonReport:
    experiment: str
    rows: list = field(default_factory=list)

    def add(self, label, value_a, value_b, tolerance, passed=None):
        if passed is None:
            passed = abs(value_a - value_b) <= tolerance
        self.rows.append(ReportRow(label, value_a, value_b, tolerance, bool(passed)))

    @property
    def passed(self):
        return all(r.passed for r in self.rows)

    def lines(self):
        out = []
        for r in self.rows:
            tag = "PASS" if r.passed else "FAIL"
            out.append(f"{tag}  {self.experiment}: {r.label}  "
                       f"got={_fmt(r.value_a)} ref={_fmt(r.value_b)} "
                       f"|diff|={_fmt(abs(r.difference))} tol={_fmt(r.tolerance)}")
        return out


# ---------------------------------------------------------------------------
# recipes

def _model(cfg, default_C=0.5, default_D=1.5, **extra):
    return ModelParams(C=cfg.get("C", default_C), D=cfg.get("D", default_D), **extra)


def recipe_stationarity_oracle(cfg):
    torus = TorusParams(L=cfg.get("L", 4), N=cfg.get("N", 3),
                        m1=cfg.get("m1", 2), m2=cfg.get("m2", 1))
    tol = cfg.get("tol", 1e-10)
    report = ComparisonReport("stationarity-oracle")
    qs = [cfg.get("q")] if cfg.get("q") is not None else [0.0, 0.3, 0.7]
    rows = []
    for q in qs:
        res = ctmc.check_stationarity(torus, q)
        report.add(f"residual q={q:g}", res, 0.0, tol)
        rows.append((q, res))
    if cfg.get("out"):
        write_csv(cfg.get("out"), ["q", "residual"], rows)
    return report


def recipe_drift_check(cfg):
    eps = cfg.get("eps", 0.01)
    m = cfg.get("m", 4)
    m2 = cfg.get("m2", 2)
    D = cfg.get("D", 1.0)
    replicas = cfg.get("replicas", 200)
    seed = cfg.get("seed", 0)
    threads = cfg.get("threads", 1)
    torus = TorusParams.from_scaling(epsilon=eps, ell=D * m, m=m, m2=m2)
    params = ModelParams.from_torus(torus)
    start = crystalline(torus)
    horizon = 1.0 / eps
    q = math.exp(-eps)

    def one(rep):
        traj = ctmc.simulate(start, q, horizon, seed=seed + rep)
        return float(np.mean(list(traj.displacement.values()))) / horizon

    rates = thread_map(one, range(replicas), threads)
    mean_rate = float(np.mean(rates))
    report = ComparisonReport("drift-check")
    report.add(f"displacement rate vs v ({replicas} replicas)",
               mean_rate, params.v, cfg.get("tol", 0.02) * params.v)
    if cfg.get("out"):
        write_csv(cfg.get("out"), ["replica", "rate"], list(enumerate(rates)))
    return report


def recipe_sde_vs_exact(cfg):
    m = cfg.get("m", 4)
    m2 = cfg.get("m2", 2)
    params = _model(cfg, default_C=0.75, default_D=1.5)
    dt = cfg.get("dt", 1e-3)
    t_end = cfg.get("t", 2.0)
    replicas = cfg.get("replicas", 10000)
    seed = cfg.get("seed", 123)
    threads = cfg.get("threads", 1)
    nsteps = round(t_end / dt)
    chunks = 8
    sizes = [replicas // chunks + (1 if i < replicas % chunks else 0) for i in range(chunks)]
    seeds = np.random.SeedSequence(seed).spawn(chunks)

    def one(i):
        snaps = sde.euler_maruyama_ensemble(np.zeros((m, m)), params, m2, dt, nsteps,
                                            seed=seeds[i], snapshot_steps=[nsteps],
                                            replicas=sizes[i])
        return snaps[nsteps]

    xi = np.concatenate(thread_map(one, range(chunks), threads), axis=0)
    report = ComparisonReport("sde-vs-exact")
    rows = []
    for y in [(0, 0), (1, 0), (0, 1)]:
        prod = xi * sde.shift_field(xi, y, m2)
        z_r = prod.mean(axis=(1, 2))
        est = float(z_r.mean())
        se = float(z_r.std(ddof=1)) / math.sqrt(replicas)
        exact = corr.covariance_finite_m(
            corr.CovarianceQuery(y=y, t=t_end, s=t_end), m, m2, params).value
        report.add(f"covariance y={y} (3 MC std errors)", est, exact, 3 * se)
        rows.append((y[0], y[1], est, exact, se))
    if cfg.get("out"):
        write_csv(cfg.get("out"), ["y1", "y2", "mc", "exact", "se"], rows)
    return report


def recipe_cor1_log_growth(cfg):
    params = _model(cfg)
    spectral = spectral_data(drift_coeffs(params))
    ts = (50.0, 100.0, 200.0, 400.0, 800.0)
    vals = [corr.covariance_quadrature(
        corr.CovarianceQuery(y=(0, 0), t=t, s=t), params).value for t in ts]
    slope = float(np.polyfit(np.log(ts), vals, 1)[0])
    target = params.v / (4 * math.pi * spectral.w)
    report = ComparisonReport("cor1-log-growth")
    report.add("slope of W0(t,t) against log t", slope, target,
               cfg.get("tol", 0.05) * target)
    if cfg.get("out"):
        write_csv(cfg.get("out"), ["t", "W0"], list(zip(ts, vals)))
    return report


def recipe_cor2_characteristic(cfg):
    params = _model(cfg)
    spectral = spectral_data(drift_coeffs(params))
    t = cfg.get("t", 400.0)
    gap = t - cfg.get("s", 300.0)
    s = t - gap
    seed = cfg.get("seed", 11)
    threads = cfg.get("threads", 1)
    y_char = tuple(int(a) for a in np.floor(spectral.U * gap))
    target = params.v / (4 * math.pi * spectral.w) * math.log((t + s) / (t - s))
    rng = np.random.default_rng(seed)
    dirs = []
    for _ in range(8):
        ang = rng.uniform(0, 2 * np.pi)
        rad = rng.uniform(0.75, 1.5)
        dirs.append(spectral.U + rad * np.array([np.cos(ang), np.sin(ang)]))

    def w_at(y):
        return corr.covariance_quadrature(
            corr.CovarianceQuery(y=y, t=t, s=s), params).value

    w_char = w_at(y_char)
    off = thread_map(lambda u: w_at(tuple(int(a) for a in np.floor(u * gap))), dirs, threads)
    report = ComparisonReport("cor2-characteristic")
    report.add("characteristic W vs log((t+s)/(t-s))", w_char, target,
               cfg.get("tol", 0.10) * target)
    for i, w_off in enumerate(off):
        report.add(f"off-characteristic direction {i} below 25% of characteristic",
                   abs(w_off), 0.0, 0.25 * w_char)
    if cfg.get("out"):
        rows = [("characteristic", y_char[0], y_char[1], w_char)]
        rows += [(f"off-{i}", *tuple(int(a) for a in np.floor(u * gap)), w)
                 for i, (u, w) in enumerate(zip(dirs, off))]
        write_csv(cfg.get("out"), ["direction", "y1", "y2", "W"], rows)
    return report


def recipe_cor3_she(cfg):
    params = _model(cfg)
    spectral = spectral_data(drift_coeffs(params))
    x, y = (1.0, 0.0), (0.0, 0.0)
    t = cfg.get("t", 4.0)
    s = cfg.get("s", 2.0)
    deltas = cfg.get("deltas") or (1e-1, 1e-2, 1e-3)
    she = corr.she_covariance(x, y, t, s)
    rels = []
    rows = []
    for d in deltas:
        val = corr.she_scaled_lattice_covariance(x, y, t, s, d, spectral, params)
        rel = abs(val - she) / she
        rels.append(rel)
        rows.append((d, val, she, rel))
    report = ComparisonReport("cor3-she")
    for i in range(1, len(rels)):
        report.add(f"relative error decreasing at delta={deltas[i]:g}",
                   rels[i], 0.0, rels[i - 1], passed=rels[i] < rels[i - 1])
    report.add("final relative error", rels[-1], 0.0, cfg.get("tol", 0.01))
    if cfg.get("out"):
        write_csv(cfg.get("out"), ["delta", "scaled", "she", "rel_err"], rows)
    return report


def recipe_gff_variance(cfg):
    params = _model(cfg)
    spectral = spectral_data(drift_coeffs(params))
    delta = cfg.get("delta", 1 / 16)
    m = cfg.get("m", 256)
    m2 = cfg.get("m2", m // 2)
    phi = corr.two_bump_test_function(delta, m)
    g = corr.gff_smoothed_variance(phi, delta, m, m2, params, spectral)
    report = ComparisonReport("gff-variance")
    report.add("lattice vs continuum variance", g.lattice, g.continuum,
               cfg.get("tol", 0.05) * abs(g.continuum))
    if cfg.get("out"):
        write_csv(cfg.get("out"), ["lattice", "continuum"], [(g.lattice, g.continuum)])
    return report


def recipe_qpoch_asymptotics(cfg):
    b, x1, x2 = 1.0, 0.0, 10.0
    epss = (1e-2, 1e-3, 1e-4)
    errs = []
    rows = []
    for eps in epss:
        q = math.exp(-eps)
        a1 = int(round(b / eps + x1))
        a2 = int(round(b / eps + x2))
        exact = ctmc.log_q_pochhammer(q, a1) - ctmc.log_q_pochhammer(q, a2)
        asym = log_qpoch_asymptotic(eps, b, x1) - log_qpoch_asymptotic(eps, b, x2)
        errs.append(abs(exact - asym))
        rows.append((eps, exact, asym, errs[-1]))
    report = ComparisonReport("qpoch-asymptotics")
    for i in range(1, len(errs)):
        report.add(f"error decreasing at eps={epss[i]:g}", errs[i], 0.0, errs[i - 1],
                   passed=errs[i] < errs[i - 1])
    report.add("final error below threshold", errs[-1], 0.0, cfg.get("tol", 1e-2))
    if cfg.get("out"):
        write_csv(cfg.get("out"), ["eps", "exact_diff", "asymptotic_diff", "error"], rows)
    return report


_RECIPES = {
    "stationarity-oracle": recipe_stationarity_oracle,
    "drift-check": recipe_drift_check,
    "sde-vs-exact": recipe_sde_vs_exact,
    "cor1-log-growth": recipe_cor1_log_growth,
    "cor2-characteristic": recipe_cor2_characteristic,
    "cor3-she": recipe_cor3_she,
    "gff-variance": recipe_gff_variance,
    "qpoch-asymptotics": recipe_qpoch_asymptotics,
}


def run_experiment(config) -> ComparisonReport:
    """Dispatch an ExperimentConfig to its recipe; deterministic per seed."""
    if config.experiment not in _RECIPES:
        raise ConfigError(f"unknown experiment {config.experiment!r}")
    return _RECIPES[config.experiment](config)


# ---------------------------------------------------------------------------
# subcommands

def _threads_from(args):
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("AKPZ_THREADS")
    return int(env) if env else 1


def cmd_ctmc(args):
    if args.start:
        with open(args.start) as fh:
            start = lattice.config_from_text(fh.read())
        report = lattice.validate(start)
        if not report.ok:
            raise ConfigError(f"start configuration invalid: {report.failures}")
        torus = start.torus
    else:
        if None in (args.L, args.N, args.m1, args.m2):
            raise ConfigError("either --start or all of --L/--N/--m1/--m2 are required")
        torus = TorusParams(L=args.L, N=args.N, m1=args.m1, m2=args.m2)
        start = crystalline(torus) if args.crystalline else lattice.enumerate_configs(torus)[0]
    observe = args.observe_every if args.observe_every else args.T
    traj = ctmc.simulate(start, args.q, args.T, seed=args.seed, observe_every=observe)
    rows = []
    for t_obs, positions in traj.samples:
        for (p1, p2), x in sorted(positions.items()):
            rows.append((t_obs, p1, p2, x))
    write_csv(args.out, ["time", "p1", "p2", "x_p"], rows)
    if args.dump_final:
        with open(args.dump_final, "w", newline="\n") as fh:
            fh.write(lattice.config_to_text(traj.final))
    print(f"wrote {len(rows)} rows to {args.out} ({len(traj.events)} events)")
    return 0


def cmd_sde(args):
    params = ModelParams(C=args.C, D=args.D)
    observe = args.observe_every if args.observe_every else args.T
    rows = []
    seeds = np.random.SeedSequence(args.seed).spawn(args.replicas)
    for rep in range(args.replicas):
        initial = sde.SdeState(xi=np.zeros((args.m, args.m)), t=0.0)
        states = sde.euler_maruyama(initial, params, args.dt, args.T, seeds[rep],
                                    m2=args.m2, record_every=observe)
        for st in states:
            for p1 in range(args.m):
                for p2 in range(args.m):
                    rows.append((rep, st.t, p1, p2, st.xi[p1, p2]))
    write_csv(args.out, ["replica", "t", "p1", "p2", "xi"], rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_cov(args):
    params = ModelParams(C=args.C, D=args.D)
    query = corr.CovarianceQuery(y=(args.y1, args.y2), t=args.t, s=args.s)
    spectral = spectral_data(drift_coeffs(params))
    if args.method == "finite":
        if args.infinite or args.m is None:
            raise ConfigError("--method finite requires --m/--m2 (not --infinite)")
        res = corr.covariance_finite_m(query, args.m, args.m2, params)
    elif args.method == "quad":
        res = corr.covariance_quadrature(query, params)
    elif args.method == "kernel":
        res = corr.covariance_heat_kernel(query, spectral, params)
    else:
        regimes = corr.corollary_regimes(query, spectral, params)
        applicable = [r for r in regimes if r.applies] or regimes
        res = corr.CovarianceResult(y=query.y, t=query.t, s=query.s,
                                    method=f"asymptotic:{applicable[0].label}",
                                    value=applicable[0].value, err_est=float("nan"))
    rows = [(res.t, res.s, res.y[0], res.y[1], res.method, res.value, res.err_est)]
    if args.out:
        write_csv(args.out, ["t", "s", "y1", "y2", "method", "value", "err_est"], rows)
    print(f"{res.method}: W_y(t,s) = {_fmt(res.value)} (err_est {_fmt(res.err_est)})")
    return 0


def cmd_validate(args):
    params = ModelParams(C=args.C, D=args.D)
    report = sde.validate_symbol_properties(params)
    print("\n".join(report.lines()))
    u_fd, rel = sde.grad_v_check(params)
    ok_grad = bool(rel.max() < 1e-6)
    print(f"{'PASS' if ok_grad else 'FAIL'}  speed_gradient_matches_U           "
          f"worst={rel.max():.3e}  tol=1.0e-06")
    return 0 if report.ok and ok_grad else 1


def cmd_oracle_stationarity(args):
    torus = TorusParams(L=args.L, N=args.N, m1=args.m1, m2=args.m2)
    res = ctmc.check_stationarity(torus, args.q)
    print(f"stationarity residual: {_fmt(res)}")
    return 0 if res < args.tol else 1


def cmd_she_check(args):
    values = {"C": args.C, "D": args.D, "out": args.out}
    if args.delta_list:
        if sorted(args.delta_list, reverse=True) != args.delta_list:
            raise ConfigError("--delta-list must be strictly decreasing")
        values["deltas"] = tuple(args.delta_list)
    report = recipe_cor3_she(ExperimentConfig("cor3-she", values))
    print("\n".join(report.lines()))
    return 0 if report.passed else 1


def cmd_gff(args):
    params = ModelParams(C=args.C, D=args.D)
    spectral = spectral_data(drift_coeffs(params))
    m2 = args.m2 if args.m2 is not None else args.m // 2
    if args.phi:
        data = np.loadtxt(args.phi)
        phi = np.zeros((args.m, args.m))
        for p1, p2, val in data.reshape(-1, 3):
            phi[int(p1) + args.m // 2, int(p2) + args.m // 2] = val
    else:
        phi = corr.two_bump_test_function(args.delta, args.m)
    g = corr.gff_smoothed_variance(phi, args.delta, args.m, m2, params, spectral)
    rel = abs(g.lattice - g.continuum) / abs(g.continuum)
    print(f"lattice variance:   {_fmt(g.lattice)}")
    print(f"continuum variance: {_fmt(g.continuum)}")
    print(f"relative gap:       {_fmt(rel)}")
    if args.out:
        write_csv(args.out, ["lattice", "continuum", "rel_gap"],
                  [(g.lattice, g.continuum, rel)])
    return 0 if rel < args.tol else 1


def cmd_run(args):
    with open(args.config) as fh:
        text = fh.read()
    config = parse_config(text)
    if args.threads:
        config.values.setdefault("threads", args.threads)
    report = run_experiment(config)
    print("\n".join(report.lines()))
    return 0 if report.passed else 1


def cmd_all(args):
    threads = _threads_from(args)
    failures = 0

    params = ModelParams(C=0.5, D=1.5)
    prop = sde.validate_symbol_properties(params)
    print("\n".join(prop.lines()))
    failures += 0 if prop.ok else 1
    _, rel = sde.grad_v_check(params)
    ok_grad = bool(rel.max() < 1e-6)
    print(f"{'PASS' if ok_grad else 'FAIL'}  speed_gradient_matches_U           "
          f"worst={rel.max():.3e}  tol=1.0e-06")
    failures += 0 if ok_grad else 1

    for name in EXPERIMENTS:
        cfg = ExperimentConfig(name, {"threads": threads})
        report = run_experiment(cfg)
        print("\n".join(report.lines()))
        failures += 0 if report.passed else 1
    print(f"\n{'ALL PASS' if failures == 0 else f'{failures} experiment(s) FAILED'}")
    return 0 if failures == 0 else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="akpz", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: AKPZ_THREADS or 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ctmc", help="simulate the particle system")
    p.add_argument("--L", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--m1", type=int)
    p.add_argument("--m2", type=int)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--observe-every", type=float, default=None)
    p.add_argument("--crystalline", action="store_true",
                   help="start from the crystalline configuration (default: first enumerated)")
    p.add_argument("--start", default=None,
                   help="initial configuration file ('L N m1 m2' header, 'p1 p2 x' rows)")
    p.add_argument("--dump-final", default=None,
                   help="write the final configuration in the same text format")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ctmc)

    p = sub.add_parser("sde", help="integrate the limiting SDE system")
    p.add_argument("--C", type=float, required=True)
    p.add_argument("--D", type=float, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--m2", type=int, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--replicas", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--observe-every", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sde)

    p = sub.add_parser("cov", help="evaluate a covariance query")
    p.add_argument("--C", type=float, required=True)
    p.add_argument("--D", type=float, required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--m2", type=int, default=None)
    p.add_argument("--infinite", action="store_true")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--y1", type=int, required=True)
    p.add_argument("--y2", type=int, required=True)
    p.add_argument("--method", choices=["finite", "quad", "kernel", "asymptotic"],
                   required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_cov)

    p = sub.add_parser("validate", help="structural property report")
    p.add_argument("--C", type=float, required=True)
    p.add_argument("--D", type=float, required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("oracle-stationarity", help="brute-force stationarity residual")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--m1", type=int, required=True)
    p.add_argument("--m2", type=int, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_oracle_stationarity)

    p = sub.add_parser("she-check", help="scaling limit toward the heat equation")
    p.add_argument("--C", type=float, default=0.5)
    p.add_argument("--D", type=float, default=1.5)
    p.add_argument("--delta-list", type=float, nargs="+", default=None,
                   help="decreasing scale parameters (default: 0.1 0.01 0.001)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_she_check)

    p = sub.add_parser("gff", help="smoothed-field variance, lattice vs continuum")
    p.add_argument("--C", type=float, default=0.5)
    p.add_argument("--D", type=float, default=1.5)
    p.add_argument("--delta", type=float, default=1 / 16)
    p.add_argument("--m", type=int, default=256)
    p.add_argument("--m2", type=int, default=None)
    p.add_argument("--phi", default=None,
                   help="optional grid file with 'p1 p2 value' rows (centered labels)")
    p.add_argument("--tol", type=float, default=0.05)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gff)

    p = sub.add_parser("run", help="run a recipe from a config file")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("all", help="run the full verification suite")
    p.set_defaults(func=cmd_all)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParameterError, ModelError, AccuracyError,
            FileNotFoundError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
