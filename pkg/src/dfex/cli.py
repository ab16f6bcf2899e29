"""``dfex`` command line.

Exit codes: 0 success, 2 config error, 3 shape or precondition error,
4 inadmissible module-sequence, 5 verification violations.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .cartoon import random_cartoon
from .config import load_config
from .errors import ConfigError, InadmissibleError, PreconditionError, ShapeError
from .featio import write_features
from .filterbank import frame_bounds
from .network import check_admissibility, extract, feature_dimension
from .signal_io import atomic_write, read_signal, write_signal
from .verify import SUITES, run_suites

DEFAULT_SEED = 0

EXIT_OK, EXIT_CONFIG, EXIT_SHAPE, EXIT_INADMISSIBLE, EXIT_VIOLATIONS = 0, 2, 3, 4, 5


def _pruning(value: str) -> str:
    return {"freq-dec": "frequency_decreasing"}.get(value, value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dfex", description="Deep convolutional feature extraction with certified bounds.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def network_args(p):
        p.add_argument("--config", required=True, help="module-sequence JSON, or a shipped name such as mnist_pooled")
        p.add_argument("--pruning", choices=("full", "freq-dec"), help="override the config's path pruning")
        p.add_argument("--normalize", action="store_true", help="normalize every bank for admissibility first")

    p = sub.add_parser("extract", help="compute the feature vector of one signal")
    network_args(p)
    p.add_argument("--input", required=True, help="signal file (CSV or DFEXSIG1 binary)")
    p.add_argument("--output", required=True, help="feature file; a JSON sidecar is written beside it")

    p = sub.add_parser("verify", help="run the randomized bound-verification suites")
    network_args(p)
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--output", help="report JSON path (default: stdout)")

    p = sub.add_parser("dims", help="print the feature dimension of a config")
    p.add_argument("--config", required=True)
    p.add_argument("--pruning", choices=("full", "freq-dec"))

    p = sub.add_parser("gen-cartoon", help="sample a random cartoon function")
    p.add_argument("--length", type=int, required=True, help="number of samples N")
    p.add_argument("--variation", type=float, default=1.0, help="variation K")
    p.add_argument("--kind", choices=("general", "lipschitz", "indicator"), default="general")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--output", required=True, help="signal file (.csv for CSV, anything else binary)")
    p.add_argument("--spec-output", help="cartoon JSON path (default: <output>.spec.json)")
    return parser


def _load(args):
    omega, options = load_config(args.config)
    if args.pruning:
        options["pruning"] = _pruning(args.pruning)
    normalize = getattr(args, "normalize", False) or options["normalize"]
    if normalize:
        omega = omega.normalized()
    return omega, options


def _require_admissible(omega) -> None:
    values, ok = check_admissibility(omega)
    if not ok:
        bad = ", ".join(f"module {i + 1}: {v:.6g}" for i, v in enumerate(values) if v > 1 + 1e-12)
        raise InadmissibleError(f"max{{B, B R^2 L^2}} <= 1 violated ({bad}); pass --normalize")


def _warn_incomplete(omega) -> None:
    for i, m in enumerate(omega.modules):
        A, _ = frame_bounds(m.bank)
        if A <= 0:
            print(f"warning: module {i + 1} has lower frame bound A = 0 (atoms are not complete)", file=sys.stderr)


def cmd_extract(args) -> int:
    omega, options = _load(args)
    _require_admissible(omega)
    _warn_incomplete(omega)
    f = read_signal(args.input)
    phi = extract(omega, f, options["pruning"])
    write_features(args.output, phi, omega.lengths, {"pruning": options["pruning"]})
    print(f"wrote {phi.dimension} features to {args.output}")
    return EXIT_OK


def cmd_verify(args) -> int:
    omega, options = _load(args)
    _require_admissible(omega)
    _warn_incomplete(omega)
    reports = run_suites(omega, args.suite, args.trials, args.seed, options["pruning"])
    doc = {"seed": args.seed, "trials": args.trials, "passed": all(r.passed for r in reports),
           "reports": [r.to_dict() for r in reports]}
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if args.output:
        atomic_write(args.output, text.encode())
    else:
        sys.stdout.write(text)
    for r in reports:
        status = "pass" if r.passed else f"FAIL ({len(r.violations)} violations)"
        print(f"{r.suite}: {status}, tightest ratio {r.tightest_ratio:.6g}", file=sys.stderr)
    return EXIT_OK if doc["passed"] else EXIT_VIOLATIONS


def cmd_dims(args) -> int:
    omega, options = load_config(args.config)
    pruning = _pruning(args.pruning) if args.pruning else options["pruning"]
    print(feature_dimension(omega, pruning))
    return EXIT_OK


def cmd_gen_cartoon(args) -> int:
    rng = np.random.default_rng(args.seed)
    sc = random_cartoon(rng, args.length, args.variation, args.kind)
    write_signal(args.output, sc.signal)
    spec_path = args.spec_output or f"{args.output}.spec.json"
    doc = {"N": sc.N, "seed": args.seed, "kind": args.kind, "cartoon": sc.spec.to_dict()}
    atomic_write(spec_path, (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode())
    print(f"wrote {args.output} and {spec_path}")
    return EXIT_OK


COMMANDS = {"extract": cmd_extract, "verify": cmd_verify, "dims": cmd_dims, "gen-cartoon": cmd_gen_cartoon}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        code, kind, err = EXIT_CONFIG, "config error", exc
    except (ShapeError, PreconditionError) as exc:
        code, kind, err = EXIT_SHAPE, "precondition violated", exc
    except InadmissibleError as exc:
        code, kind, err = EXIT_INADMISSIBLE, "inadmissible module-sequence", exc
    except OSError as exc:
        code, kind, err = EXIT_CONFIG, "file error", exc
    print(f"dfex: {kind}: {err}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
