"""Command-line driver.

    competing-hte run --config exp.json [--out DIR]
    competing-hte preset --setting 2 --values 0,0.1,0.2 --out DIR
    competing-hte semi-synth --config semi.json --data pairs.csv [--out FILE]

``--workers`` and ``--seed`` apply to every command. Exit status is 0 on
success, 2 for configuration errors and 3 for data errors.
"""
from __future__ import annotations

import argparse
import itertools
import json
import logging
import sys

from . import experiment, semisynth
from .errors import ConfigError, DataError

log = logging.getLogger("competing_hte")

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3


def _values(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    common.add_argument("--seed", type=int, default=None, help="override the base seed")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="competing-hte", description=__doc__.split("\n")[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", parents=[common], help="run an experiment described by a JSON config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", default="results")

    s = sub.add_parser("preset", parents=[common], help="sweep one synthetic setting with default options")
    s.add_argument("--setting", type=int, choices=(1, 2, 3, 4), required=True)
    s.add_argument("--values", type=_values, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--reps", type=int, default=None)
    s.add_argument("--n-train", type=int, default=None)

    m = sub.add_parser("semi-synth", parents=[common], help="semi-synthetic benchmark on paired outcomes")
    m.add_argument("--config", required=True)
    m.add_argument("--data", required=True)
    m.add_argument("--out", default="semi_synth.csv")
    return p


def _run_experiment(cfg, args, out_dir):
    cfg = experiment.with_overrides(cfg, base_seed=args.seed)
    log.info("setting %s, %d sweep values x %d reps", cfg.setting, len(cfg.sweep_values), cfg.n_reps)
    rows, summary = experiment.run(cfg, workers=args.workers)
    for path in experiment.write_outputs(cfg, rows, summary, out_dir):
        print(path)
    return EXIT_OK


def _semi_synth(args):
    with open(args.config) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: {exc}") from None
    day_indexed = raw.pop("day_indexed", True)
    xi_a = raw.pop("xi_a", 0.0)
    xi_d = raw.pop("xi_d", 0.0)
    if args.seed is not None:
        raw["seed"] = args.seed
    base = semisynth.SemiSynthConfig.from_dict(raw)
    pairs = semisynth.read_pairs_csv(args.data, base.horizon, day_indexed)
    rows = []
    for a, d in itertools.product(_as_list(xi_a), _as_list(xi_d)):
        cfg = semisynth.SemiSynthConfig.from_dict({**raw, "xi_a": a, "xi_d": d})
        log.info("xi_a=%s xi_d=%s", a, d)
        rows.extend(semisynth.run(pairs, cfg))
    semisynth.write_summary_csv(rows, args.out)
    print(args.out)
    return EXIT_OK


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        if args.command == "run":
            return _run_experiment(experiment.ExperimentConfig.from_json(args.config), args, args.out)
        if args.command == "preset":
            kw = {"setting": args.setting, "sweep_values": args.values}
            if args.reps is not None:
                kw["n_reps"] = args.reps
            if args.n_train is not None:
                kw["n_train"] = args.n_train
            return _run_experiment(experiment.ExperimentConfig(**kw), args, args.out)
        return _semi_synth(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
