"""Command-line surface: curve generation, schedule scanning, Monte Carlo
runs and parameter inspection, emitting CSV for curves and JSON for
structured results.

Parameter precedence is flag > environment (KAONBELL_PARAMS) > config file
> built-in default.  Every command with a file output also writes a
run manifest next to it, from which the data file can be reproduced
byte-for-byte.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .chsh import (
    LOCALITY_P_MIN,
    ChshSchedule,
    find_extremal_violation,
    s_qm,
    s_stable,
    s_unrenormalized,
)
from .montecarlo import HvModel, estimate_asymmetry, run_experiment
from .params import (
    CONFIG_KEYS,
    ENV_PARAMS,
    ConfigParseError,
    ParameterError,
    ParameterSet,
    default_params,
    parse_config_values,
    validate,
)
from .qm import qm_asymmetry
from .realism import asymmetry_bounds

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BOUND_VIOLATION = 3

_MODEL_NAMES = tuple(m.value for m in HvModel)


def _fmt(x: float) -> str:
    """CSV float format: 9 significant digits, '.' decimal separator."""
    return format(x, ".9g")


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def resolve_params(args) -> tuple[ParameterSet, dict[str, str], str | None]:
    """Apply flag > env > file > default precedence field by field.

    Returns (params, per-field provenance, config path or None).
    """
    config_path = None
    config_origin = None
    if getattr(args, "params", None):
        config_path, config_origin = args.params, "file"
    elif os.environ.get(ENV_PARAMS):
        config_path, config_origin = os.environ[ENV_PARAMS], "env"

    values = default_params().as_dict()
    provenance = {k: "default" for k in CONFIG_KEYS}
    if config_path is not None:
        with open(config_path, "r", encoding="utf-8") as fh:
            file_values = parse_config_values(fh.read(), path=str(config_path))
        for key, value in file_values.items():
            values[key] = value
            provenance[key] = f"{config_origin}:{config_path}"
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
            provenance[key] = "flag"

    if getattr(args, "stable", False):
        values["gamma_s"] = 0.0
        values["gamma_l"] = 0.0
        provenance["gamma_s"] = provenance["gamma_l"] = "stable-limit"
        return ParameterSet(**values), provenance, config_path

    return validate(ParameterSet(**values)), provenance, config_path


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _resolved_command(args, p: ParameterSet) -> list[str]:
    """Self-contained argv that reproduces this run bit-exactly: parameters
    are pinned by explicit flags, independent of files and environment."""
    cmd = ["kaonbell", args.command]
    for key in CONFIG_KEYS:
        cmd += [f"--{key.replace('_', '-')}", repr(getattr(p, key))]
    if args.command == "curve":
        cmd += [args.kind]
        if args.kind == "asymmetry":
            cmd += ["--alpha", repr(args.alpha)]
        else:
            cmd += ["--mode", args.mode]
            if args.mode == "unren":
                cmd += ["--p", repr(args.p)]
        cmd += ["--x-lo", repr(args.x_lo), "--x-hi", repr(args.x_hi),
                "--steps", str(args.steps)]
    elif args.command == "scan":
        cmd += ["--tau-lo", repr(args.tau_lo), "--tau-hi", repr(args.tau_hi),
                "--objective", args.objective, "--tol", repr(args.tol)]
        if args.stable:
            cmd += ["--stable"]
    elif args.command == "simulate":
        seed = args.seed if args.seed is not None else 0
        cmd += ["--model", args.model, "--tau1", repr(args.tau1),
                "--tau2", repr(args.tau2), "--n-events", str(args.n_events),
                "--seed", str(seed), "--threads", str(args.threads)]
    if getattr(args, "out", None):
        cmd += ["--out", str(args.out)]
    return cmd


def _write_manifest(args, p: ParameterSet, out_path: Path, seed=None) -> None:
    manifest = {
        "tool": "kaonbell",
        "version": __version__,
        "created_utc": _utc_now(),
        "command": list(args.raw_argv),
        "resolved_command": _resolved_command(args, p),
        "params": p.as_dict(),
        "seed": seed,
        "outputs": [{"path": out_path.name, "sha256": _sha256(out_path)}],
    }
    manifest_path = out_path.with_name(out_path.stem + ".manifest.json")
    _write_text(manifest_path, _json_text(manifest))


def _grid(lo: float, hi: float, steps: int) -> list[float]:
    step = (hi - lo) / (steps - 1)
    return [lo + i * step for i in range(steps - 1)] + [hi]


def cmd_curve(args) -> int:
    p, _, _ = resolve_params(args)
    if args.steps < 2:
        print("error: --steps must be >= 2", file=sys.stderr)
        return EXIT_USAGE
    if not args.x_lo < args.x_hi:
        print("error: need --x-lo < --x-hi", file=sys.stderr)
        return EXIT_USAGE

    lines = []
    if args.kind == "asymmetry":
        if args.alpha is None or args.alpha <= 1.0:
            print("error: asymmetry curves need --alpha > 1", file=sys.stderr)
            return EXIT_USAGE
        if args.x_lo < 0.0:
            print("error: need --x-lo >= 0", file=sys.stderr)
            return EXIT_USAGE
        lines.append("tau1,a_qm,a_lr_min,a_lr_max")
        for t in _grid(args.x_lo, args.x_hi, args.steps):
            bounds = asymmetry_bounds(p, t, args.alpha * t)
            a = qm_asymmetry(p, t, args.alpha * t)
            lines.append(f"{_fmt(t)},{_fmt(a)},{_fmt(bounds.lower)},{_fmt(bounds.upper)}")
    else:
        if args.mode == "unren" and args.p is None:
            print("error: --mode unren needs --p", file=sys.stderr)
            return EXIT_USAGE
        if args.x_lo < 0.0:
            print("error: need --x-lo >= 0", file=sys.stderr)
            return EXIT_USAGE
        lines.append("tau,s")
        for t in _grid(args.x_lo, args.x_hi, args.steps):
            if args.mode == "ren":
                s = s_qm(p, t).s
            elif args.mode == "unren":
                s = s_unrenormalized(p, args.p, t).s
            else:
                s = s_stable(p.delta_m, t).s
            lines.append(f"{_fmt(t)},{_fmt(s)}")

    out_path = Path(args.out)
    _write_text(out_path, "\n".join(lines) + "\n")
    _write_manifest(args, p, out_path)
    return EXIT_OK


def cmd_scan(args) -> int:
    p, _, _ = resolve_params(args)
    tau_star, s_star = find_extremal_violation(
        p, args.tau_lo, args.tau_hi, objective=args.objective, tol=args.tol
    )
    value = s_qm(p, tau_star)
    if args.objective == "min":
        violation = value.violated_lower
    else:
        violation = value.violated_upper
    example = ChshSchedule(p=6.0, tau=tau_star)
    result = {
        "objective": args.objective,
        "range": [args.tau_lo, args.tau_hi],
        "tol": args.tol,
        "tau_star": tau_star,
        "s_star": s_star,
        "status": "violation" if violation else "no_violation",
        "violated_lower": value.violated_lower,
        "violated_upper": value.violated_upper,
        "p_min_locality": LOCALITY_P_MIN,
        "example_schedule": {
            "p": example.p,
            "tau": example.tau,
            "times": list(example.times),
        },
        "params": p.as_dict(),
    }
    text = _json_text(result)
    print(text, end="")
    if args.out:
        out_path = Path(args.out)
        _write_text(out_path, text)
        _write_manifest(args, p, out_path)
    return EXIT_OK


def cmd_simulate(args) -> int:
    p, _, _ = resolve_params(args)
    seed = args.seed if args.seed is not None else 0
    counts = run_experiment(
        HvModel(args.model), p, args.tau1, args.tau2,
        n_events=args.n_events, seed=seed, n_jobs=args.threads,
    )
    estimate = estimate_asymmetry(counts)
    bounds = asymmetry_bounds(p, args.tau1, args.tau2)
    within = bounds.contains(estimate.value, slack=3.0 * estimate.sigma)
    result = {
        "counts": counts.to_dict(),
        "asymmetry": {
            "value": estimate.value,
            "sigma": estimate.sigma,
            "degenerate": estimate.degenerate,
        },
        "bounds": {"lower": bounds.lower, "upper": bounds.upper},
        "qm_asymmetry": qm_asymmetry(p, args.tau1, args.tau2),
        "within_bounds": within,
    }
    out_path = Path(args.out)
    _write_text(out_path, _json_text(result))
    _write_manifest(args, p, out_path, seed=seed)
    if not within:
        print(
            f"error: estimate {estimate.value} outside "
            f"[{bounds.lower}, {bounds.upper}] +- 3 sigma",
            file=sys.stderr,
        )
        return EXIT_BOUND_VIOLATION
    return EXIT_OK


def cmd_params(args) -> int:
    p, provenance, config_path = resolve_params(args)
    result = {
        "params": p.as_dict(),
        "provenance": provenance,
        "config_file": config_path,
    }
    text = _json_text(result)
    print(text, end="")
    if args.out:
        out_path = Path(args.out)
        _write_text(out_path, text)
        _write_manifest(args, p, out_path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--params", metavar="FILE", default=None,
                        help="parameter config file (key = value lines)")
    shared.add_argument("--gamma-s", dest="gamma_s", type=float, default=None,
                        help="K_S width in 1/tau_S")
    shared.add_argument("--gamma-l", dest="gamma_l", type=float, default=None,
                        help="K_L width in 1/tau_S")
    shared.add_argument("--delta-m", dest="delta_m", type=float, default=None,
                        help="mass difference in 1/tau_S")
    shared.add_argument("--seed", type=int, default=None,
                        help="64-bit RNG seed (used by simulate; default 0)")

    parser = argparse.ArgumentParser(
        prog="kaonbell",
        description="Quantum vs local-realistic predictions for entangled "
                    "neutral-kaon pairs.",
    )
    parser.add_argument("--version", action="version", version=f"kaonbell {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    curve = sub.add_parser("curve", parents=[shared],
                           help="emit a CSV curve over a time grid")
    curve.add_argument("kind", choices=["asymmetry", "chsh"])
    curve.add_argument("--alpha", type=float, default=None,
                       help="tau2/tau1 ratio for asymmetry curves (> 1)")
    curve.add_argument("--mode", choices=["ren", "unren", "stable"], default="ren",
                       help="chsh curve flavour")
    curve.add_argument("--p", type=float, default=None,
                       help="schedule offset for --mode unren")
    curve.add_argument("--x-lo", dest="x_lo", type=float, required=True)
    curve.add_argument("--x-hi", dest="x_hi", type=float, required=True)
    curve.add_argument("--steps", type=int, required=True,
                       help="number of rows, endpoints included")
    curve.add_argument("--out", required=True, help="output CSV path")

    scan = sub.add_parser("scan", parents=[shared],
                          help="locate the extremal CHSH value over spacings")
    scan.add_argument("--tau-lo", dest="tau_lo", type=float, default=0.0)
    scan.add_argument("--tau-hi", dest="tau_hi", type=float, default=4.0)
    scan.add_argument("--objective", choices=["min", "max"], default="min")
    scan.add_argument("--tol", type=float, default=1e-6)
    scan.add_argument("--stable", action="store_true",
                      help="use the stable-kaon limit (zero widths)")
    scan.add_argument("--out", default=None, help="also write the JSON here")

    simulate = sub.add_parser("simulate", parents=[shared],
                              help="run a hidden-variable Monte Carlo experiment")
    simulate.add_argument("--model", choices=list(_MODEL_NAMES), required=True)
    simulate.add_argument("--tau1", type=float, required=True)
    simulate.add_argument("--tau2", type=float, required=True)
    simulate.add_argument("--n-events", dest="n_events", type=int, default=1_000_000)
    simulate.add_argument("--threads", type=int, default=1)
    simulate.add_argument("--out", required=True, help="output JSON path")

    params = sub.add_parser("params", parents=[shared],
                            help="print the resolved parameters and provenance")
    params.add_argument("--out", default=None, help="also write the JSON here")
    return parser


_HANDLERS = {
    "curve": cmd_curve,
    "scan": cmd_scan,
    "simulate": cmd_simulate,
    "params": cmd_params,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.raw_argv = ["kaonbell"] + argv
    try:
        return _HANDLERS[args.command](args)
    except (ParameterError, ConfigParseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
