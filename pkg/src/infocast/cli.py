"""Command-line front end.

    infocast run --config F [--seed S] [--out DIR]
    infocast sweep --spec F [--jobs J]
    infocast validate [--tol-scale X]

Config files are flat `key = value` text with `#` comments.  Exit codes:
0 ok, 1 validation failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import analytics, engine, mobility
from .engine import SimConfig, config_to_flat
from .mobility import MobilityConfig
from .protocol import ChannelConfig

REQUIRED_KEYS = ("road_length", "n_rsus", "packets_per_source",
                 "buffer_size", "scheme", "sim_time")

KNOWN_KEYS = REQUIRED_KEYS + (
    "arrival_rate", "speed_min", "speed_max", "velocity", "comm_range",
    "spacing_rate", "slot_duration", "tx_prob", "rsu_placement",
    "rsu_positions", "payload_len", "drop_fraction", "window_size",
    "domain_segments", "warmup", "eta_multiples", "soliton_c",
    "soliton_delta", "seed",
)


class ConfigError(Exception):
    pass


def parse_flat_file(path) -> dict:
    flat = {}
    try:
        lines = open(path).read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected `key = value`, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        flat[key] = value
    return flat


def _get(flat, key, cast, default):
    if key not in flat:
        return default
    try:
        return cast(flat[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for key `{key}`: {flat[key]!r}") from exc


def build_config(flat: dict) -> SimConfig:
    """Turn a flat key-value mapping into a SimConfig; unknown or missing
    keys raise ConfigError naming the offending key."""
    for key in flat:
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown config key `{key}`")
    for key in REQUIRED_KEYS:
        if key not in flat:
            raise ConfigError(f"missing required config key `{key}`")

    speed_min = _get(flat, "speed_min", float, 20.0)
    speed_max = _get(flat, "speed_max", float, 40.0)
    velocity = _get(flat, "velocity", float, None)
    if velocity is not None:
        speed_min = speed_max = velocity
    try:
        mob = MobilityConfig(
            arrival_rate=_get(flat, "arrival_rate", float, 0.1),
            speed_min=speed_min,
            speed_max=speed_max,
            road_length=_get(flat, "road_length", float, None),
            comm_range=_get(flat, "comm_range", float, 200.0),
            spacing_rate=_get(flat, "spacing_rate", float, None),
        )
        chan = ChannelConfig(
            slot_duration=_get(flat, "slot_duration", float, 0.01),
            tx_prob=_get(flat, "tx_prob", float, 0.05),
            comm_range=mob.comm_range,
        )
        positions = ()
        placement = _get(flat, "rsu_placement", str, "random")
        if "rsu_positions" in flat:
            positions = tuple(float(x) for x in flat["rsu_positions"].split(","))
            placement = "explicit"
        etas = _get(flat, "eta_multiples", str, "1,3,6,9,12")
        return SimConfig(
            mobility=mob,
            channel=chan,
            n_rsus=_get(flat, "n_rsus", int, None),
            rsu_placement=placement,
            rsu_positions=positions,
            message_packets=_get(flat, "packets_per_source", int, None),
            payload_len=_get(flat, "payload_len", int, 32),
            buffer_capacity=_get(flat, "buffer_size", int, None),
            scheme=_get(flat, "scheme", str, None),
            drop_fraction=_get(flat, "drop_fraction", float, 0.2),
            window=_get(flat, "window_size", int, 10),
            domain_segments=_get(flat, "domain_segments", int, 10),
            sim_time=_get(flat, "sim_time", float, None),
            warmup=_get(flat, "warmup", float, None),
            eta_multiples=tuple(float(x) for x in etas.split(",")),
            soliton_c=_get(flat, "soliton_c", float, 0.03),
            soliton_delta=_get(flat, "soliton_delta", float, 0.5),
            rng_seed=_get(flat, "seed", int, 0),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_run(args) -> int:
    try:
        flat = parse_flat_file(args.config)
        if args.seed is not None:
            flat["seed"] = str(args.seed)
        config = build_config(flat)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    os.makedirs(args.out, exist_ok=True)
    record = engine.run(config)
    engine.write_metrics_csv(record, os.path.join(args.out, "metrics.csv"))
    engine.write_manifest(config, os.path.join(args.out, "manifest.txt"))
    print(f"wrote {args.out}/metrics.csv ({len(record.dd_samples)} decode events, "
          f"{record.realized_vehicles} vehicles)")
    return 0


def _replication_seed(base_seed: int, replication: int) -> int:
    child = np.random.SeedSequence(base_seed, spawn_key=(replication,))
    return int(child.generate_state(1, dtype=np.uint64)[0])


def _sweep_point(task):
    flat, param, value, rep, base_seed = task
    flat = dict(flat)
    flat[param] = str(value)
    flat["seed"] = str(_replication_seed(base_seed, rep))
    config = build_config(flat)
    record = engine.run(config)
    rows = []
    if record.dd_samples:
        rows.append((param, value, rep, "mdd", engine.mdd(record)))
    means = engine.mean_collected(record)
    for eta, mean in zip(record.etas, means):
        rows.append((param, value, rep, f"collected_eta{eta:g}", mean))
        ps = engine.p_success(record, eta, config.message_packets)
        rows.append((param, value, rep, f"p_success_eta{eta:g}", ps))
    rows.append((param, value, rep, "vehicles", record.realized_vehicles))
    return rows


def cmd_sweep(args) -> int:
    try:
        spec = parse_flat_file(args.spec)
        for key in ("config", "param", "values"):
            if key not in spec:
                raise ConfigError(f"missing required sweep key `{key}`")
        base_flat = parse_flat_file(spec["config"])
        param = spec["param"]
        if param not in KNOWN_KEYS:
            raise ConfigError(f"unknown sweep parameter `{param}`")
        values = [v.strip() for v in spec["values"].split(",") if v.strip()]
        reps = int(spec.get("replications", "1"))
        out = spec.get("out", "sweep_out")
        if reps < 1 or not values:
            raise ConfigError("need at least one value and one replication")
        base_seed = int(spec.get("seed", base_flat.get("seed", "0")))
        # validate the base config once before launching anything
        probe = dict(base_flat)
        probe[param] = values[0]
        build_config(probe)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    tasks = [(base_flat, param, value, rep, base_seed)
             for value in values for rep in range(reps)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(task) for task in tasks]

    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "sweep.csv")
    with open(path, "w", newline="") as fh:
        fh.write("sweep_param,value,replication,metric,value\n")
        for rows in results:
            for param, value, rep, metric, val in rows:
                fh.write(f"{param},{value},{rep},{metric},{val:.6f}\n")
    with open(os.path.join(out, "manifest.txt"), "w") as fh:
        fh.write(f"# {engine.TOOL_VERSION} sweep manifest\n")
        fh.write(f"param = {param}\nvalues = {','.join(values)}\n"
                 f"replications = {reps}\nseed = {base_seed}\n")
        for key, val in sorted(base_flat.items()):
            fh.write(f"base.{key} = {val}\n")
    print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# validate: closed forms against their Monte-Carlo counterparts


def run_validators(tol_scale: float = 1.0) -> list[tuple]:
    """Each entry: (name, analytic, empirical, rel_err, tolerance, passed)."""
    checks = []

    def add(name, analytic, empirical, tol):
        rel = abs(empirical - analytic) / abs(analytic) if analytic else math.inf
        checks.append((name, analytic, empirical, rel, tol * tol_scale,
                       rel <= tol * tol_scale))

    rng = np.random.default_rng(20260826)

    exact, approx = analytics.expected_contacts_uncoded(100)
    mc = float(engine.simulate_uncoded_collection(100, 2000, rng).mean())
    add("coupon_uncoded_mc_vs_exact", exact, mc, 0.03)
    add("coupon_uncoded_approx_vs_exact", exact, approx, 0.01)

    exact_e, approx_e = analytics.expected_contacts_erasure(10, 1.0)
    mc_e = float(engine.simulate_erasure_collection(10, 1.0, 2000, rng).mean())
    add("coupon_erasure_mc_vs_exact", exact_e, mc_e, 0.03)
    add("coupon_erasure_approx_vs_exact", exact_e, approx_e, 0.05)

    lam, r = 0.01, 200.0
    ana = mobility.analytic_cluster_stats(lam, r)
    emp = mobility.empirical_cluster_stats(100_000, lam, r, rng)
    for fieldname in ("p_last", "e_cluster_size", "e_inter_cluster",
                      "e_cluster_length"):
        add(f"cluster_{fieldname}", getattr(ana, fieldname),
            getattr(emp, fieldname), 0.02)

    v0, length = 30.0, 20000.0
    ana_full = mobility.analytic_cluster_stats(lam, r, v0, length)
    runs = [mobility.simulate_collector_meets(lam, r, v0, length, rng)
            for _ in range(8)]
    add("theorem1_meet_count", ana_full.e_meet_count,
        float(np.mean([m.meet_count for m in runs])), 0.10)
    add("theorem1_meet_time", ana_full.e_meet_time,
        float(np.mean([m.mean_meet_time for m in runs])), 0.10)

    add("aloha_peak", 1.0 / (2.0 * math.e), analytics.aloha_throughput(0.5), 1e-12)
    # n carriers at per-slot probability p offer load np; the finite-n peak
    # n*p*(1-p)^(n-1) at p = 1/n approaches 1/e from above as n grows
    n = 50
    grid = np.linspace(0.3 / n, 2.5 / n, 12)
    sim = [engine.simulate_contention_throughput(n, p, 12000, rng_seed=7)
           for p in grid]
    add("slotted_channel_peak", 1.0 / math.e, max(sim), 0.05)

    ok = 0
    total = 0
    for delta in (2, 3, 4):
        for b in (8, 12, 20):
            params = analytics.DisseminationParams(
                spacing_rate=0.01, comm_range=200.0, mean_speed=30.0,
                rsu_spacing=400.0, domain_segments=delta, buffer_capacity=b,
                message_packets=1)
            rate = analytics.expected_packets_per_segment(params, 1.0)
            uniform = analytics.optimal_allocation(b, delta)
            params.message_packets = max(1e-9, rate * uniform.total * 0.4)
            _, best_dd = analytics.brute_force_best_allocation(params)
            dd_uniform = analytics.decoding_distance(params, uniform)
            total += 1
            if best_dd is not None and dd_uniform == best_dd:
                ok += 1
    add("eq11_uniform_optimal", float(total), float(ok), 1e-12)

    return checks


def cmd_validate(args) -> int:
    checks = run_validators(args.tol_scale)
    failed = 0
    for name, analytic, empirical, rel, tol, passed in checks:
        status = "PASS" if passed else "FAIL"
        print(f"{status} {name}: analytic={analytic:.6g} empirical={empirical:.6g} "
              f"rel_err={rel:.4g} tol={tol:.4g}")
        failed += not passed
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="infocast",
        description="Rateless-coded highway dissemination simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one simulation")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default="run_out")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    p_sweep.add_argument("--spec", required=True)
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.set_defaults(func=cmd_sweep)

    p_val = sub.add_parser("validate",
                           help="check closed forms against Monte Carlo")
    p_val.add_argument("--tol-scale", type=float, default=1.0)
    p_val.set_defaults(func=cmd_validate)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
