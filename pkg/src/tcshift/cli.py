"""Command-line interface.

Verbs run the minimal pipeline prefix they need:

    tcshift validate --config cfg.json        assumption report only
    tcshift tc       --config cfg.json        critical temperature
    tcshift gl       --config cfg.json        + macroscopic coefficients
    tcshift dc       --config cfg.json        + ground energy and D_c
    tcshift shift    --config cfg.json        + T_c(h) table
    tcshift verify   --config cfg.json        + full identity-check battery
    tcshift sweep    --config cfg.json --sweep-axis h --sweep-values 0.01,0.02

Output directory: --out, else $TCSHIFT_OUT, else ./tcshift_out/<digest prefix>.
Exit codes: 0 success (verify: all checks passed), 1 check failure, 2+ the
distinct per-error codes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import ConfigError, ToolError
from .model import load_config
from .pipeline import (
    SWEEP_AXES,
    SWEEP_COLUMNS,
    Pipeline,
    _write_csv,
    config_digest,
    emit,
    sweep,
)

VERB_STAGE = {
    "validate": "validate",
    "tc": "tc",
    "gl": "gl",
    "dc": "dc",
    "shift": "shift",
    "verify": "verify",
}

OUT_ENV = "TCSHIFT_OUT"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tcshift",
        description="Critical temperature and its quadratic field shift for a pairing model",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in (*VERB_STAGE, "sweep"):
        p = sub.add_parser(verb)
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--format", default="all", choices=("json", "csv", "all"))
        p.add_argument("--threads", type=int, default=1)
        if verb == "sweep":
            p.add_argument("--sweep-axis", required=True, choices=SWEEP_AXES)
            p.add_argument("--sweep-values", required=True, help="comma-separated values")
    return parser


def resolve_out_dir(arg_out, cfg: dict) -> Path:
    if arg_out:
        return Path(arg_out)
    env = os.environ.get(OUT_ENV)
    if env:
        return Path(env)
    return Path("tcshift_out") / config_digest(cfg)[:12]


def _print_summary(bundle) -> None:
    if bundle.tc:
        print(f"beta_c = {bundle.tc['beta_c']:.12g}   T_c = {bundle.tc['T_c']:.12g}")
    if bundle.gl:
        g = bundle.gl
        print(
            f"lambda0 = {g['lambda0']:.12g}   lambda1 = {g['lambda1']:.12g}   "
            f"lambda2 = {g['lambda2']:.12g}"
        )
    if bundle.ground_state:
        gs = bundle.ground_state
        print(f"e0 = {gs['e0']:.12g}   D_c = {gs['D_c']:.12g}")
    if bundle.shift:
        for h, t in bundle.shift["rows"]:
            print(f"h = {h:<10g} T_c(h) = {t:.12g}")
        for w in bundle.shift["warnings"]:
            print(f"warning: {w}", file=sys.stderr)
    if bundle.checks:
        n_pass = sum(1 for c in bundle.checks if c["passed"])
        print(f"identity checks: {n_pass}/{len(bundle.checks)} passed")
        for c in bundle.checks:
            if not c["passed"]:
                print(
                    f"  FAIL {c['id']}: measured {c['measured']:.6g} "
                    f"expected {c['expected']:.6g} tol {c['tolerance']:.2g}",
                    file=sys.stderr,
                )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    out_dir = resolve_out_dir(args.out, cfg)

    try:
        if args.verb == "sweep":
            values = [v for v in args.sweep_values.split(",") if v.strip()]
            try:
                values = [float(v) for v in values]
            except ValueError as exc:
                raise ConfigError(f"bad sweep value: {exc}") from exc
            rows = sweep(cfg, args.sweep_axis, values, threads=args.threads)
            out_dir.mkdir(parents=True, exist_ok=True)
            path = out_dir / "sweep.csv"
            _write_csv(path, SWEEP_COLUMNS, [[r[c] for c in SWEEP_COLUMNS] for r in rows])
            print(f"wrote {path}")
            errors = [r for r in rows if r["error"]]
            for r in errors:
                print(f"value {r['value']}: {r['error']}", file=sys.stderr)
            return 0 if not errors else 1

        model, numerics = load_config(args.config)
        pipe = Pipeline(model, numerics, cfg)
        bundle = pipe.bundle(VERB_STAGE[args.verb])
        emit(bundle, out_dir, args.format)
        _print_summary(bundle)
        print(f"results in {out_dir}")
        if args.verb == "validate" and not all(i["passed"] for i in bundle.validation):
            return 3
        if args.verb == "verify" and not bundle.all_checks_passed:
            return 1
        return 0
    except ToolError as exc:
        out_dir.mkdir(parents=True, exist_ok=True)
        record = {
            "error": type(exc).__name__,
            "message": str(exc),
            "exit_code": exc.exit_code,
        }
        (out_dir / "error.json").write_text(json.dumps(record, indent=2) + "\n")
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
