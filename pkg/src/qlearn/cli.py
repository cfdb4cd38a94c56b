"""``qlearn`` command line."""

from __future__ import annotations

import argparse
import json
import sys

from .concepts import ConceptError
from .harness import KINDS, ConfigError, ExperimentConfig, run, write_report
from .partitions import PartitionError
from .zoo import SpecError

EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qlearn", description="Quantum vs classical query-complexity experiments.")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--class", dest="class_spec", help="class spec, e.g. parity:n=6 or rand:n=4,size=12,seed=1")
    p.add_argument("--learner", choices=("quantum", "halving", "nestedbv"))
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=lambda s: int(s, 0))
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--config", help="JSON file with the same keys; command-line flags win")
    p.add_argument("--figures", metavar="DIR", help="also render PNG figures into DIR")
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    doc = {}
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a JSON object")
    doc = {k.replace("-", "_"): v for k, v in doc.items()}
    if "class" in doc:
        doc["class_spec"] = doc.pop("class")
    doc["kind"] = args.kind
    for key in ("class_spec", "learner", "k", "m", "l", "trials", "seed", "out", "format", "figures"):
        value = getattr(args, key)
        if value is not None:
            doc[key] = value
    return ExperimentConfig.from_dict(doc)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        report = run(config)
    except (ConfigError, SpecError, ConceptError, PartitionError, OSError) as exc:
        print(f"qlearn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = write_report(report, config)
    if not config.out:
        sys.stdout.write(text)
    if config.figures:
        from .plotting import render_figures
        for path in render_figures(report, config.figures):
            print(f"figure: {path}", file=sys.stderr)
    return 0 if report.passed else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
