"""Command-line runner: ``hdswap swap|herald|decay|count``.

Exit codes: 0 success, 1 bad input, 2 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .measure import (
    DetectionPattern,
    HeraldClass,
    _dims_for,
    classify_state,
    count_events,
    enumerate_outcomes,
    fidelity_decay,
    run,
    simulate,
)
from .protocol import ANCILLAS, VARIANTS, DetectorModel, ProtocolConfig, hyper_render, render_state

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2

PRESETS = {
    # the time-bin x polarization experiment: d = 4 with the symmetric ancilla
    "hyper4d": {"dim": 4, "ancilla": "symmetric"},
}


class InvariantError(RuntimeError):
    pass


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--dim", type=int, default=None, choices=(3, 4, 5, 6))
    p.add_argument("--detector", choices=("threshold", "pnr"), default="threshold")
    p.add_argument("--heralds", choices=("fixed", "flexible"), default="fixed")
    p.add_argument(
        "--ancilla-phase",
        type=float,
        default=0,
        help="quarter-turn index (exact backend) or radians (float backend)",
    )
    p.add_argument("--variant", choices=VARIANTS, default="standard")
    p.add_argument("--ancilla", choices=ANCILLAS, default=None)
    p.add_argument("--backend", choices=("exact", "float"), default="exact")
    p.add_argument("--preset", choices=sorted(PRESETS), default=None)


def config_from_args(args) -> ProtocolConfig:
    preset = PRESETS.get(args.preset, {}) if getattr(args, "preset", None) else {}
    dim = args.dim if args.dim is not None else preset.get("dim", 4)
    ancilla = args.ancilla if args.ancilla is not None else preset.get("ancilla", "plain")
    phase = args.ancilla_phase
    if args.backend == "exact":
        if not float(phase).is_integer():
            raise ValueError("exact backend needs an integer quarter-turn --ancilla-phase; use --backend float")
        phase = int(phase)
    return ProtocolConfig(
        dimension=dim,
        ancilla_phase=phase,
        detector_model=args.detector,
        herald_assignment=args.heralds,
        variant=args.variant,
        backend=args.backend,
        ancilla=ancilla,
    )


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return repr(float(x))


def manifest(cfg: ProtocolConfig) -> dict:
    cfg_json = json.dumps(cfg.to_json(), sort_keys=True)
    return {
        "tool": "hdswap",
        "version": __version__,
        "config": cfg.to_json(),
        "input_hash": hashlib.sha256(cfg_json.encode()).hexdigest(),
    }


def cmd_swap(args) -> int:
    cfg = config_from_args(args)
    evolved = simulate(cfg)
    report = run(cfg, evolved)
    counts = count_events(cfg, evolved)

    kept = tuple(report.rows[0].kept)
    total = report.total_probability(kept)
    if cfg.scalar_backend.exact and total != 1:
        raise InvariantError(f"outcome probabilities sum to {total}, not 1")

    payload = report.to_json()
    payload["manifest"] = manifest(cfg)
    payload["event_counts"] = counts
    text = json.dumps(payload, sort_keys=True, indent=1, ensure_ascii=False) + "\n"

    out = Path(args.out) if args.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(text, encoding="utf-8")
        (out / "report.csv").write_text(report.to_csv(), encoding="utf-8")

    print(f"dimension={cfg.dimension} detector={cfg.detector_model.value} heralds={cfg.herald_assignment.value}")
    for cls, p in report.aggregates.items():
        if cls is HeraldClass.OTHER:
            continue
        shown = report.dyadic(cls) or _fmt(p)
        print(f"{cls.value}\tevents={report.counts[cls]}\tprobability={shown}")
    for cls, p in report.conditional.items():
        print(f"conditional[{cls.value}]={_fmt(p)}")
    print(
        "events total={total_full} coincidence={coincidence_full} success={success} "
        "(detected-only total={total_detected}, coincidence={coincidence_detected})".format(**counts)
    )
    return EXIT_OK


def cmd_herald(args) -> int:
    cfg = config_from_args(args)
    evolved, circuit, norm = simulate(cfg)
    try:
        wanted = DetectionPattern.parse(args.pattern, DetectorModel.PNR)
    except ValueError as exc:
        raise ValueError(str(exc)) from None
    detected = set(circuit.detected)
    stray = wanted.clicked_modes() - detected
    if stray:
        raise ValueError(f"pattern names undetected modes {sorted(stray)}; detected are {sorted(detected)}")
    outcomes = enumerate_outcomes(evolved, detected, DetectorModel.PNR, norm_squared=norm)
    match = next((o for o in outcomes if o.pattern == wanted), None)
    print(f"pattern {wanted}")
    if match is None:
        print("probability 0")
        return EXIT_OK
    state = match.heralded
    kept = tuple(circuit.kept)
    cls, fid = classify_state(state, kept, _dims_for(cfg))
    print(f"probability {_fmt(match.probability)}")
    print(f"class {cls.value} fidelity {_fmt(fid)}")
    print(f"state {render_state(state, kept)}")
    try:
        print(f"hyper {hyper_render(state, kept)}")
    except ValueError:
        pass
    return EXIT_OK


def _unit_fraction(text: str) -> Fraction:
    # decimal input is kept exact so that 0.95**5 prints as 0.7737809375
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def cmd_decay(args) -> int:
    ns = range(args.n, args.n_max + 1) if args.n_max is not None else [args.n]
    etas = args.eta
    if args.csv or len(etas) > 1 or args.n_max is not None:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["eta", "n", "fidelity"])
        for eta in etas:
            for n in ns:
                w.writerow([float(eta), n, repr(float(fidelity_decay(eta, n)))])
    else:
        print(repr(float(fidelity_decay(etas[0], args.n))))
    return EXIT_OK


def cmd_count(args) -> int:
    cfg = config_from_args(args)
    print(json.dumps(count_events(cfg), sort_keys=True, indent=1))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hdswap", description="Exact linear-optics entanglement-swapping simulator.")
    parser.add_argument("--version", action="version", version=f"hdswap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("swap", help="run the full pipeline and write JSON/CSV reports")
    _add_config_flags(p)
    p.add_argument("--out", default=None, help="directory for report.json and report.csv")
    p.set_defaults(func=cmd_swap)

    p = sub.add_parser("herald", help="show the state heralded by one detection pattern")
    _add_config_flags(p)
    p.add_argument("--pattern", required=True, help="e.g. \"b'':3,e':1,f':4,c'':2\"")
    p.set_defaults(func=cmd_herald)

    p = sub.add_parser("decay", help="fidelity eta**N after N imperfect interferences")
    p.add_argument("--eta", type=_unit_fraction, nargs="+", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--n-max", type=int, default=None, help="sweep N from --n to --n-max")
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("count", help="distinct outcome counts under each counting convention")
    _add_config_flags(p)
    p.set_defaults(func=cmd_count)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InvariantError, AssertionError) as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
