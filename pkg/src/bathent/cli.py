"""Command-line entry point: ``bathent [TASK] (--config PATH | --recipe NAME) [options]``."""
import argparse
import logging
import sys
from importlib import resources

from . import __version__
from .config import TASKS, load_config, loads_config
from .driver import run, write_csv
from .errors import BathentError, ConfigError, DomainError, NumericalError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def recipe_names():
    root = resources.files("bathent") / "recipes"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def recipe_text(name):
    path = resources.files("bathent") / "recipes" / f"{name}.cfg"
    if not path.is_file():
        raise ConfigError(f"unknown recipe {name!r}; available: {', '.join(recipe_names())}")
    return path.read_text(encoding="utf-8")


def build_parser():
    p = argparse.ArgumentParser(prog="bathent", description=__doc__)
    p.add_argument("task", nargs="?", choices=TASKS, help="what to compute (default: the config's 'task')")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", metavar="PATH", help="configuration file")
    src.add_argument("--recipe", metavar="NAME", help="bundled figure recipe")
    p.add_argument("--out", metavar="PATH", help="CSV output (default: config 'output', else stdout)")
    p.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes for scan points")
    p.add_argument("--paper-scale", action="store_true", help="n_grid = 10000 and s_max = 10 Omega_c")
    p.add_argument("--list-recipes", action="store_true", help="print the bundled recipe names and exit")
    p.add_argument("-v", "--verbose", action="store_true", help="progress messages on stderr")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.list_recipes:
        print("\n".join(recipe_names()))
        return EXIT_OK
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        if args.recipe:
            cfg = loads_config(recipe_text(args.recipe))
        elif args.config:
            cfg = load_config(args.config)
        else:
            raise ConfigError("give --config PATH or --recipe NAME")
        if args.paper_scale:
            cfg = cfg.with_(paper_scale=True)
        records = run(cfg, args.task, jobs=args.jobs)
        out = args.out or cfg.output
        if out:
            write_csv(records, out)
        else:
            write_csv(records, sys.stdout)
    except (ConfigError, DomainError) as exc:
        print(f"bathent: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"bathent: I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, BathentError, ArithmeticError) as exc:
        print(f"bathent: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
