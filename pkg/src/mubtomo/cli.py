"""Command-line interface.

::

    mubtomo bases check [--scheme mub|ssqst|all] [--visibility V]
    mubtomo bases export --scheme mub --out mub.json
    mubtomo simulate --state HV --scheme ssqst --n 100000 --seed 7 --out counts.json
    mubtomo reconstruct counts.json [--method mle|linear] [--out result.json]
    mubtomo experiment ratio --state bell-phi-plus --n 1000,10000 --trials 30 --out ratio.csv
    mubtomo experiment histogram --states 300 --out hist.csv

Exit status is 0 on success, 1 for usage, configuration or file errors and
2 for numerical failures (non-convergence under ``--strict``).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io as fio
from .bases import certify_complete, certify_unbiased, mub_scheme, scheme_by_name, ssqst_scheme
from .estimate import MleOptions, linear_inversion, mle_reconstruct
from .experiments import ConfigError, ExperimentConfig, records_to_csv, run_experiment, summarize_records
from .metrics import fidelity
from .simulate import sample_counts
from .states import InvalidStateError, RngStream, named_state

log = logging.getLogger("mubtomo")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _n_list(text: str) -> list[int]:
    try:
        return [int(float(x)) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid N list {text!r}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_bases(args) -> int:
    names = ["mub", "ssqst"] if args.scheme == "all" else [args.scheme]
    if args.action == "export":
        if args.scheme == "all":
            raise UsageError("export needs a single --scheme")
        scheme = scheme_by_name(names[0], args.visibility)
        _emit(json.dumps(fio.scheme_to_dict(scheme), indent=1) + "\n", args.out)
        return EXIT_OK
    report = {}
    for name in names:
        # Unbiasedness is a property of the ideal projectors.
        ideal = mub_scheme(1.0) if name == "mub" else ssqst_scheme()
        rep = certify_unbiased(ideal)
        report[ideal.name] = {
            "bases": ideal.num_bases,
            "elements": len(ideal.elements),
            "cross_basis_pairs": rep.num_pairs,
            "distinct_overlaps": rep.distinct_overlaps,
            "max_deviation_from_1/D": rep.max_deviation,
            "unbiased": rep.certified,
            "complete": certify_complete(scheme_by_name(name, args.visibility)),
            "visibility": args.visibility if name == "mub" else 1.0,
        }
    _emit(json.dumps(report, indent=1) + "\n", args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    scheme = scheme_by_name(args.scheme, args.visibility)
    rng = RngStream(args.seed)
    rho = named_state(args.state, rng, args.purity)
    if len(args.n) != 1:
        raise UsageError("simulate takes a single --n value")
    data = sample_counts(rho, scheme, args.n[0], args.model, rng)
    doc = fio.counts_to_dict(data, true_state=rho)
    doc["state"] = args.state
    _emit(json.dumps(doc, indent=1) + "\n", args.out)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    data, truth = fio.counts_from_dict(fio.read_json(args.counts))
    scheme = scheme_by_name(args.scheme or data.scheme, args.visibility if args.visibility is not None else data.visibility)
    if data.counts.shape != (scheme.num_bases, scheme.dim):
        raise fio.FormatError(f"counts shape {data.counts.shape} does not fit scheme {scheme.name}")
    if args.method == "mle":
        result = mle_reconstruct(data, scheme, MleOptions(tolerance=args.tolerance, max_iterations=args.max_iterations))
    else:
        result = linear_inversion(data, scheme)
    extra = {"scheme": scheme.name}
    if truth is not None:
        extra["fidelity"] = fidelity(truth, result.rho_hat)
    _emit(json.dumps(fio.result_to_dict(result, **extra), indent=1) + "\n", args.out)
    if "fidelity" in extra:
        log.info("fidelity with true state: %.6f", extra["fidelity"])
    if args.strict and not result.converged:
        log.error("reconstruction did not converge")
        return EXIT_NUMERIC
    return EXIT_OK


_FLAG_TO_FIELD = {
    "state": "state", "scheme": "schemes", "visibility": "visibility", "n": "n_total", "trials": "trials",
    "states": "num_states", "model": "model", "seed": "seed", "out": "out", "baseline": "baseline",
    "purity": "purity", "jobs": "jobs",
}


def build_config(args) -> ExperimentConfig:
    base = {}
    if args.config:
        base = fio.read_json(args.config)
        if not isinstance(base, dict):
            raise ConfigError("config file must hold a JSON object")
    base["experiment"] = args.kind
    for flag, key in _FLAG_TO_FIELD.items():
        value = getattr(args, flag, None)
        if value is None:
            continue
        if flag == "scheme":
            value = ["MUB", "SSQST"] if value == "all" else [value.upper()]
        base[key] = value
    if args.kind == "histogram" and "schemes" not in base:
        base["schemes"] = ["SSQST"]
    return ExperimentConfig.from_dict(base).validate()


def cmd_experiment(args) -> int:
    cfg = build_config(args)
    records = run_experiment(cfg)
    text = records_to_csv(records)
    summary = summarize_records(records)
    summary["config"] = {k: v for k, v in vars(cfg).items()}
    if cfg.out:
        Path(cfg.out).write_text(text)
        Path(cfg.out + ".summary.json").write_text(json.dumps(summary, indent=1) + "\n")
    else:
        sys.stdout.write(text)
        sys.stderr.write(json.dumps(summary, indent=1) + "\n")
    if args.strict and not all(r.converged for r in records):
        log.error("%d reconstructions did not converge", sum(not r.converged for r in records))
        return EXIT_NUMERIC
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mubtomo", description="Simulated MUB vs separable two-qubit state tomography.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bases", help="certify or export measurement schemes")
    b.add_argument("action", choices=["check", "export"])
    b.add_argument("--scheme", choices=["mub", "ssqst", "all"], default="all")
    b.add_argument("--visibility", type=float, default=1.0)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bases)

    s = sub.add_parser("simulate", help="simulate one count data set")
    s.add_argument("--state", required=True)
    s.add_argument("--scheme", choices=["mub", "ssqst"], required=True)
    s.add_argument("--n", type=_n_list, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--model", choices=["multinomial", "poisson"], default="multinomial")
    s.add_argument("--visibility", type=float, default=1.0)
    s.add_argument("--purity", type=float, default=1.0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("reconstruct", help="reconstruct a density matrix from a counts file")
    r.add_argument("counts")
    r.add_argument("--scheme", choices=["mub", "ssqst"])
    r.add_argument("--visibility", type=float)
    r.add_argument("--method", choices=["mle", "linear"], default="mle")
    r.add_argument("--tolerance", type=float, default=1e-10)
    r.add_argument("--max-iterations", type=int, default=100_000)
    r.add_argument("--strict", action="store_true")
    r.add_argument("--out")
    r.set_defaults(func=cmd_reconstruct)

    e = sub.add_parser("experiment", help="run a Monte-Carlo experiment")
    e.add_argument("kind", choices=["histogram", "ratio"])
    e.add_argument("--config", help="JSON file with ExperimentConfig fields; flags override it")
    e.add_argument("--state")
    e.add_argument("--scheme", choices=["mub", "ssqst", "all"])
    e.add_argument("--visibility", type=float)
    e.add_argument("--n", type=_n_list)
    e.add_argument("--trials", type=int)
    e.add_argument("--states", type=int)
    e.add_argument("--model", choices=["multinomial", "poisson"])
    e.add_argument("--seed", type=int)
    e.add_argument("--baseline", choices=["truth", "pooled"])
    e.add_argument("--purity", type=float)
    e.add_argument("--jobs", type=int)
    e.add_argument("--strict", action="store_true")
    e.add_argument("--out")
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, InvalidStateError, fio.FormatError, FileNotFoundError, ValueError) as exc:
        print(f"mubtomo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"mubtomo: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
