"""Command-line driver.

    porompm run <config.yaml>
    porompm preset <name> [--scale S] [--stabilized|--unstabilized]
                   [--basis gimp|linear] [--solver direct|fixed_stress]
                   [-o DIR] [--snapshot-every N]
    porompm verify terzaghi
    porompm report <run-dir>

Exit codes: 0 success, 2 configuration error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import RunConfig, parse_config, serialize_config
from .driver import simulate
from .errors import ConfigurationError, PoromechanicsError, SolverFailure
from .outputs import RunWriter, write_history_csv, write_profile_csv
from .scenarios import (
    build_scene,
    oscillation_metric,
    terzaghi_exact,
    terzaghi_profile,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def run_configured(cfg, config_text=None):
    """Run one configured scene into its output directory."""
    overrides = dict(cfg.overrides)
    scene = build_scene(cfg.preset, scale=cfg.scale, stabilized=cfg.stabilized,
                        basis=cfg.basis_kind, **overrides)
    for probe in cfg.probes:
        scene.probes[probe.name] = (probe.x, probe.y)
    writer = RunWriter(cfg.output_dir,
                       config_text if config_text is not None else serialize_config(cfg))
    writer.log(f"scene {scene.name}: {len(scene.initial_particles)} particles, "
               f"grid {scene.grid.cells}, dt {scene.cfg.dt:g}, t_end {scene.t_end:g}")

    def excess(particles):
        if scene.steady is None:
            return None
        return particles.p - np.array([scene.steady_pressure(x) for x in particles.x])

    def observer(rec, particles, history):
        writer.log(
            f"step {rec.step} t {rec.t:.6g} dt {rec.dt:.3g} "
            f"iters {rec.report.iterations} cuts {rec.report.cut_events}"
        )
        if cfg.snapshot_every and (rec.step - 1) % cfg.snapshot_every == 0:
            writer.snapshot(particles, rec.step - 1, rec.t - rec.dt,
                            p_excess=excess(particles))

    result = simulate(scene, solver=cfg.solver, observer=observer)

    for name, series in result.probes.items():
        write_history_csv(writer.path(f"history_{name}.csv"), series)
    if scene.name == "terzaghi" and result.status == "completed":
        Z, P = terzaghi_profile(result.particles, scene)
        T = scene.meta["c_v"] * result.records[-1].t / scene.meta["H"] ** 2
        write_profile_csv(writer.path("profile_terzaghi.csv"), Z, P,
                          terzaghi_exact(Z, T))
        flips, jump = oscillation_metric(P)
        writer.log(f"oscillation metric: flips {flips} max_jump {jump:.4f}")
    writer.log(f"status {result.status}" + (f": {result.failure}" if result.failure else ""))
    writer.finalize(result.records)
    return result


def cmd_run(args):
    try:
        with open(args.config) as f:
            text = f.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    cfg = parse_config(text)
    result = run_configured(cfg, config_text=text)
    if result.status != "completed":
        print(f"solver failure: {result.failure}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_preset(args):
    cfg = RunConfig(
        preset=args.name, scale=args.scale,
        stabilization="off" if args.unstabilized else "ppp",
        basis=args.basis, solver=args.solver,
        output_dir=args.output or f"runs/{args.name}",
        snapshot_every=args.snapshot_every,
    )
    result = run_configured(cfg)
    if result.status != "completed":
        # demonstration runs may legitimately record non-convergence of the
        # unstabilized method; only stabilized failures are solver errors
        if args.unstabilized:
            print(f"recorded outcome: {result.failure}", file=sys.stderr)
            return EXIT_OK
        print(f"solver failure: {result.failure}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_verify(args):
    if args.scenario != "terzaghi":
        raise ConfigurationError(f"unknown verification scenario {args.scenario!r}")
    checks = []
    scene = build_scene("terzaghi", stabilized=True)
    res = simulate(scene)
    Z, P = terzaghi_profile(res.particles, scene)
    flips, _ = oscillation_metric(P)
    interior = Z >= 0.1
    err = float(np.abs(P[interior] - 1.0).max())
    checks.append(("stabilized run completed", res.status == "completed"))
    checks.append((f"stabilized sign flips {flips} <= 2", flips <= 2))
    checks.append((f"stabilized max |P-1| interior {err:.4f} <= 0.02", err <= 0.02))
    scene_u = build_scene("terzaghi", stabilized=False)
    res_u = simulate(scene_u)
    Zu, Pu = terzaghi_profile(res_u.particles, scene_u)
    flips_u, _ = oscillation_metric(Pu)
    checks.append((f"unstabilized sign flips {flips_u} >= 10", flips_u >= 10))
    ok = True
    for label, passed in checks:
        print(("PASS  " if passed else "FAIL  ") + label)
        ok = ok and passed
    return EXIT_OK if ok else EXIT_SOLVER


def cmd_report(args):
    path = os.path.join(args.run_dir, "solve_report.csv")
    try:
        with open(path) as f:
            lines = f.read().strip().splitlines()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    steps = {}
    for ln in lines[1:]:
        step, it, rel, kry = ln.split(",")
        steps.setdefault(int(step), []).append((float(rel), int(kry)))
    n = len(steps)
    iters = [len(v) - 1 for v in steps.values()]
    kry = [k for v in steps.values() for _, k in v if k > 0]
    print(f"steps: {n}")
    if n:
        print(f"newton iterations: mean {np.mean(iters):.2f} max {max(iters)}")
        final = [v[-1][0] for v in steps.values()]
        print(f"final relative residual: median {np.median(final):.3e}")
    if kry:
        print(f"krylov iterations per solve: mean {np.mean(kry):.1f} max {max(kry)}")
    return EXIT_OK


def main(argv=None):
    parser = argparse.ArgumentParser(prog="porompm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a configured scene")
    p_run.add_argument("config")
    p_run.set_defaults(func=cmd_run)

    p_pre = sub.add_parser("preset", help="run a built-in scene")
    p_pre.add_argument("name")
    p_pre.add_argument("--scale", type=float, default=1.0)
    group = p_pre.add_mutually_exclusive_group()
    group.add_argument("--stabilized", action="store_true", default=True)
    group.add_argument("--unstabilized", action="store_true", default=False)
    p_pre.add_argument("--basis", choices=["gimp", "linear"], default="gimp")
    p_pre.add_argument("--solver", choices=["direct", "fixed_stress"], default="direct")
    p_pre.add_argument("-o", "--output", default=None)
    p_pre.add_argument("--snapshot-every", type=int, default=0)
    p_pre.set_defaults(func=cmd_preset)

    p_ver = sub.add_parser("verify", help="run the consolidation verification")
    p_ver.add_argument("scenario")
    p_ver.set_defaults(func=cmd_verify)

    p_rep = sub.add_parser("report", help="summarize a run's solve report")
    p_rep.add_argument("run_dir")
    p_rep.set_defaults(func=cmd_report)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except PoromechanicsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
