"""``coopmag`` command line: one subcommand per scenario kind."""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .. import __version__
from ..errors import ConfigError, CoopmagError, NumericalError, OutputError
from . import config as cfgmod
from .runner import run_scenario

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OUTPUT = 0, 2, 3, 4

# CLI flag -> dotted config path
_FLAG_PATHS = {
    "n": "geometry.n_qubits",
    "a_over_lambda": "geometry.a_over_lambda",
    "temperature": "environment.temperature_T",
    "xi": "disorder.xi",
    "n_realizations": "disorder.n_realizations",
    "method": "solver.method",
    "n_traj": "solver.n_traj",
    "t_max": "solver.t_max",
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coopmag", description="Cooperative qubit dynamics in a magnon bath.")
    p.add_argument("--version", action="version", version=f"coopmag {__version__}")
    sub = p.add_subparsers(dest="kind", required=True, metavar="SCENARIO")
    for kind in cfgmod.KINDS:
        s = sub.add_parser(kind, help=f"run a {kind} scenario")
        s.add_argument("--config", help="scenario TOML file")
        s.add_argument("--preset", help="material preset (default yig-nv)")
        s.add_argument("--seed", type=int, help="master seed for stochastic parts")
        s.add_argument("--out", help="output directory")
        s.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override any config field (TOML value syntax); repeatable")
        s.add_argument("--n", type=int, help="number of qubits")
        s.add_argument("--a-over-lambda", type=float, nargs="+", help="lattice constant(s) a/lambda")
        s.add_argument("--temperature", type=float, nargs="+", help="temperature(s) in K")
        s.add_argument("--xi", type=float, help="disorder strength")
        s.add_argument("--n-realizations", type=int, help="disorder realizations")
        s.add_argument("--method", choices=("dense", "trajectories"))
        s.add_argument("--n-traj", type=int, help="trajectories per run")
        s.add_argument("--t-max", type=float, help="final time in 1/Gamma0")
        if kind == "spectrum":
            s.add_argument("--sweep", type=float, nargs=3, metavar=("A_MIN", "A_MAX", "COUNT"),
                           help="sweep a/lambda over COUNT evenly spaced values")
        s.add_argument("--dump-config", action="store_true",
                       help="print the resolved configuration and exit")
    return p


def build_config(args: argparse.Namespace) -> cfgmod.ScenarioConfig:
    raw: dict = {}
    if args.config:
        try:
            with open(args.config, "rb") as fh:
                raw = cfgmod.tomllib.load(fh)
        except OSError as exc:
            raise cfgmod.ConfigValidation({"--config": f"cannot read {args.config}: {exc.strerror}"}) from None
        except cfgmod.tomllib.TOMLDecodeError as exc:
            raise cfgmod.ConfigValidation({"--config": f"TOML syntax error: {exc}"}) from None
        if raw.get("kind", args.kind) != args.kind:
            raise cfgmod.ConfigValidation(
                {"kind": f"config file is a {raw['kind']!r} scenario, not {args.kind!r}"})
    raw["kind"] = args.kind
    if args.preset is not None:
        raw["preset"] = args.preset
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.out is not None:
        raw.setdefault("output", {})["directory"] = args.out
    for attr, path in _FLAG_PATHS.items():
        val = getattr(args, attr)
        if val is not None:
            sec, key = path.split(".")
            raw.setdefault(sec, {})[key] = val
    sweep = getattr(args, "sweep", None)
    if sweep is not None:
        lo, hi, count = sweep
        if count < 2 or count != int(count):
            raise cfgmod.ConfigValidation({"--sweep": "COUNT must be an integer >= 2"})
        raw.setdefault("geometry", {})["a_over_lambda"] = [
            lo + (hi - lo) * i / (int(count) - 1) for i in range(int(count))]
    for assignment in args.set:
        cfgmod.apply_override(raw, assignment)
    return cfgmod.from_dict(raw)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = build_config(args)
        if args.dump_config:
            sys.stdout.write(cfg.dumps())
            return EXIT_OK
        m = run_scenario(cfg)
    except ConfigError as exc:
        print(f"coopmag: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"coopmag: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OutputError, OSError) as exc:
        print(f"coopmag: output error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    except CoopmagError as exc:  # pragma: no cover - every subclass is mapped above
        print(f"coopmag: {exc}", file=sys.stderr)
        return 1
    noun = "file" if len(m.files) == 1 else "files"
    print(f"wrote {len(m.files)} data {noun} to {m.directory} ({m.wall_seconds:.1f} s); manifest {m.manifest_path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
