"""Argument parsing, output writing and exit codes.

Exit codes: 0 success, 2 invalid configuration or arguments, 3 numerical
failure during a run.
"""

from __future__ import annotations

import argparse
import json
import logging
import platform
import sys
import warnings
from pathlib import Path

import numpy as np
import pydantic
import scipy
import yaml

from .. import __version__
from ..exceptions import ConfigError, DomainError, GeometryError, InvalidStateError, SubradiantError
from .config import KINDS, load_scenario
from .runners import RUNNERS

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("subradiant")

_HELP = {
    "spectrum": "tabulate dimer shifts and decay rates over a separation grid",
    "gate": "plan and simulate a single-dimer rotation",
    "readout": "Monte-Carlo readout or initialization of one dimer",
    "swap": "exchange-driven SWAP or sqrt(SWAP) between two dimers",
    "cphase": "calibrated field-driven CPHASE between two dimers",
    "schedule": "compile a circuit on a layout, budget it and (<=2 sites) simulate",
    "sweep": "run any scenario over a parameter grid",
    "compare": "subradiant-dimer vs Raman error and time comparison",
    "paper-table": "recompute every quoted figure next to its quoted value",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML or JSON scenario file")
    common.add_argument("--out", type=Path, help="output directory (default: config output.dir or ./results)")
    common.add_argument("--seed", type=int, help="master RNG seed (overrides the config)")
    common.add_argument("--quiet", action="store_true", help="suppress the summary on stdout")
    p = _Parser(prog="subradiant", description="Subradiant-dimer qubit simulator.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in (*KINDS, "paper-table"):
        sub.add_parser(name, parents=[common], help=_HELP[name], description=_HELP[name])
    return p


def _seed_of(params, cli_seed):
    if cli_seed is not None:
        if cli_seed < 0:
            raise ConfigError("--seed must be non-negative")
        return cli_seed
    return int(getattr(params, "seed", 0) or 0)


def manifest(command, params, seed, files) -> dict:
    """Reproducibility record; deliberately free of timestamps and host names."""
    return {
        "command": command,
        "params": params.model_dump(mode="json") if params is not None else {},
        "seed": seed,
        "files": sorted(files),
        "versions": {
            "subradiant": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "pydantic": pydantic.VERSION,
            "pyyaml": yaml.__version__,
        },
    }


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s %(message)s")
    cmd = args.command
    try:
        if cmd == "paper-table":
            if args.config is not None:
                raise ConfigError("paper-table takes no config file")
            scenario, params = None, None
        else:
            scenario, params = load_scenario(args.config, cmd)
        seed = _seed_of(params, args.seed)
        if args.seed is not None and params is not None and "seed" in type(params).model_fields:
            params = params.model_copy(update={"seed": seed})
        out_dir = args.out or Path((scenario.output.dir if scenario and scenario.output.dir else None) or "results")
        prefix = scenario.output.prefix if scenario else ""
        with warnings.catch_warnings():
            if args.quiet:
                warnings.simplefilter("ignore")
            files, summary = RUNNERS[cmd](params, seed)
    except (ConfigError, DomainError, GeometryError, InvalidStateError) as exc:
        print(f"configuration error:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SubradiantError, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # domain / geometry errors raised from parameter values
        print(f"configuration error:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir.mkdir(parents=True, exist_ok=True)
    names = [prefix + n for n in files]
    for name, text in zip(names, files.values()):
        (out_dir / name).write_text(text)
    man = manifest(cmd, params, seed, names)
    (out_dir / f"{prefix}manifest.json").write_text(json.dumps(man, indent=2, sort_keys=True) + "\n")
    if not args.quiet:
        print(summary)
        print(f"wrote {len(names) + 1} files to {out_dir}")
    return EXIT_OK


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    raise SystemExit(main())
