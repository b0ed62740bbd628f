"""Command line entry point ``kkf``.

Exit status: 0 on success, 2 on validation failure, 1 on runtime errors.
``KKF_THREADS`` caps how many sweep members run concurrently.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import io
from .config import RunConfig, materialize, parse_config, run_preset
from .kernel import kernel_identity_suite
from .langevin import run_langevin, sample_ensemble
from .model import ValidationError, validate_stability
from .solver import init_density, evolve, INITIAL_PRESETS

log = logging.getLogger("kkf")


def _workers(n_jobs: int) -> int:
    cap = os.environ.get("KKF_THREADS")
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError:
            raise ValidationError(f"KKF_THREADS must be an integer, got {cap!r}")
    return max(1, min(n_jobs, limit))


def _read_config(path: str, lenient: bool) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read configuration {path}: {exc}") from exc
    return parse_config(text, lenient=lenient)


def _run_one(cfg: RunConfig, out_dir: Path | None) -> Path:
    params, grid, g, initial = materialize(cfg)
    series = cfg.output.series
    if out_dir is not None or series is None:
        series = str((out_dir or Path(".")) / f"{cfg.label}.csv")
    prefix = cfg.output.snapshot_prefix or str(Path(series).with_suffix(""))
    counter = {"n": 0}

    def dump(field):
        io.write_snapshot(f"{prefix}_{counter['n']:06d}.kkf", field)
        counter["n"] += 1

    rho = init_density(initial, grid)
    result = evolve(rho, params, g, grid.n_t, snapshot_every=cfg.snapshot_every,
                    on_snapshot=dump, unsafe=cfg.unsafe_grid)
    io.write_series(series, result.records)
    log.info("%s: d_omega=%g d_t=%.6g G_omega=%g n_theta=%d -> %s", cfg.label, grid.d_omega,
             grid.d_t, grid.G_omega, grid.n_theta, series)
    return Path(series)


def _run_batch(configs: list[RunConfig], out_dir: Path | None) -> list[Path]:
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    with ThreadPoolExecutor(max_workers=_workers(len(configs))) as pool:
        return list(pool.map(lambda c: _run_one(c, out_dir), configs))


def cmd_solve(args) -> int:
    cfg = _read_config(args.config, args.lenient)
    for path in _run_batch(cfg.expand(), Path(args.out) if args.out else None):
        print(path)
    return 0


def cmd_preset(args) -> int:
    configs = run_preset(args.name, args.override or [])
    for path in _run_batch(configs, Path(args.out)):
        print(path)
    return 0


def cmd_langevin(args) -> int:
    cfg = _read_config(args.config, args.lenient)
    out_dir = Path(args.out) if args.out else Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    for c in cfg.expand():
        params, grid, g, initial = materialize(c)
        evaluator = INITIAL_PRESETS[initial] if isinstance(initial, str) else initial
        ens = sample_ensemble(evaluator, g, c.langevin.N, c.langevin.seed, grid.G_omega)
        dt = c.langevin.dt or grid.d_t
        n_steps = int(math.ceil(c.grid.T / dt - 1e-9))
        series, _ = run_langevin(ens, params, dt, n_steps)
        rows = [{"step": n, "t": t, "abs_r": r, "phase_r": p, "abs_s": s}
                for n, (t, r, p, s) in enumerate(zip(series.t, series.abs_r,
                                                     series.phase_r, series.abs_s))]
        path = out_dir / f"{c.label}_langevin.csv"
        io.write_series(path, rows, fields=("step", "t", "abs_r", "phase_r", "abs_s"))
        print(path)
    return 0


def cmd_kernel_check(args) -> int:
    ok = True
    for check in kernel_identity_suite():
        status = "PASS" if check.passed else "FAIL"
        ok &= check.passed
        print(f"{status}  {check.name:<32s} error={check.error:.3e} tol={check.tol:.0e}")
    return 0 if ok else 1


def cmd_stability(args) -> int:
    cfg = _read_config(args.config, args.lenient)
    ok = True
    for c in cfg.expand():
        from .config import _grid_for
        grid = _grid_for(c, unsafe=True)
        report = validate_stability(c.model, grid)
        ok &= report.overall_ok
        print(f"[{c.label}] d_omega={grid.d_omega:g} d_t={grid.d_t:.6g} "
              f"G_omega={grid.G_omega:g}")
        print(report.describe())
    return 0 if ok else 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kkf", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run the finite-difference solver on a config")
    s.add_argument("config")
    s.add_argument("--out", help="directory for series/snapshots (default: from config)")
    s.add_argument("--lenient", action="store_true", help="warn on unknown keys")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("preset", help="run a named preset sweep")
    s.add_argument("name")
    s.add_argument("--out", default=".")
    s.add_argument("--override", action="append", metavar="KEY=VALUE",
                   help="e.g. grid.d_omega=0.1 or sweep.values=[1,6]")
    s.set_defaults(func=cmd_preset)

    s = sub.add_parser("langevin", help="run the finite-N particle simulation")
    s.add_argument("config")
    s.add_argument("--out")
    s.add_argument("--lenient", action="store_true")
    s.set_defaults(func=cmd_langevin)

    s = sub.add_parser("kernel-check", help="verify the fundamental-solution identities")
    s.set_defaults(func=cmd_kernel_check)

    s = sub.add_parser("stability", help="report the stability conditions of a config")
    s.add_argument("config")
    s.add_argument("--lenient", action="store_true")
    s.set_defaults(func=cmd_stability)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
