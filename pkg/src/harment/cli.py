"""Command-line front end: classify a spec, report a partition, rebuild the
entropy-vs-block-size dataset.

Exit codes: 0 success, 2 spec error, 3 numerical-integrity failure, 4 I/O.
All outputs are deterministic; every CSV starts with a provenance comment
carrying the tool version and a hash of the effective configuration.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import DEFAULT, TOLERANCE_NAMES, Tolerances
from .entanglement import full_report
from .errors import HarmentError, IntegrityError, NotPositive, NotSymmetric
from .kernel import build_kernel
from .lattice import CouplingSpec, EtaChainParams, build_eta_chain, coupling_from_json
from .plotsvg import line_plot_svg
from .scaling import FIXED_N_VARY_BLOCK, entropy_sweep, fit_entropy_log_growth
from .spectral import classify

log = logging.getLogger("harment")

EXIT_OK = 0
EXIT_SPEC = 2
EXIT_INTEGRITY = 3
EXIT_IO = 4

FIG1_ETAS = (0.2, 0.6, 1.2, 1.6)


def _parse_tol_overrides(pairs) -> Tolerances:
    overrides = {}
    for pair in pairs or ():
        name, _, value = pair.partition("=")
        if name not in TOLERANCE_NAMES:
            raise argparse.ArgumentTypeError(
                f"unknown tolerance {name!r}; known: {', '.join(TOLERANCE_NAMES)}"
            )
        field_type = int if name == "dense_cap" else float
        overrides[name] = field_type(value)
    return DEFAULT.replace(**overrides)


def _parse_sizes(text: str) -> list[int]:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(f"sizes must be a:b or a:b:step, got {text!r}")
    a, b = int(parts[0]), int(parts[1])
    step = int(parts[2]) if len(parts) == 3 else 1
    if step < 1 or b < a:
        raise argparse.ArgumentTypeError(f"bad size range {text!r}")
    return list(range(a, b + 1, step))


def _load_spec(args, tol: Tolerances) -> CouplingSpec:
    if args.spec is not None:
        text = Path(args.spec).read_text()
        return coupling_from_json(text, tol=tol)
    return build_eta_chain(EtaChainParams(eta=args.eta, n_sites=args.n), tol=tol)


def _config_hash(payload: dict) -> str:
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def _provenance(payload: dict) -> str:
    return f"# harment {__version__} config={_config_hash(payload)}"


def _add_spec_source(parser: argparse.ArgumentParser, need_n1: bool) -> None:
    parser.add_argument("--eta", type=float, help="chain parameter of the builtin example model")
    parser.add_argument("--n", type=int, help="number of sites (with --eta)")
    parser.add_argument("--spec", type=str, help="path to a coupling spec JSON document")
    if need_n1:
        parser.add_argument("--n1", type=int, required=True, help="inner block size")
    parser.add_argument("--out", type=str, help="output directory")
    parser.add_argument(
        "--tol-override",
        action="append",
        metavar="NAME=VALUE",
        help="override a numerical tolerance (repeatable)",
    )


def _check_spec_source(args, parser) -> None:
    inline = args.eta is not None or args.n is not None
    if args.spec is not None and inline:
        parser.error("give either --eta/--n or --spec, not both")
    if args.spec is None:
        if args.eta is None or args.n is None:
            parser.error("need --eta and --n together, or --spec FILE")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="harment",
        description="Criticality and entanglement of harmonic lattices from the spectral function",
    )
    parser.add_argument("--version", action="version", version=f"harment {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_classify = sub.add_parser("classify", help="regular/singular verdict with unit-circle roots")
    _add_spec_source(p_classify, need_n1=False)

    p_report = sub.add_parser("report", help="entanglement report for one partition")
    _add_spec_source(p_report, need_n1=True)

    p_fig1 = sub.add_parser("fig1", help="entropy vs block size dataset (CSV + SVG)")
    p_fig1.add_argument("--n", type=int, default=512, help="chain size (default 512)")
    p_fig1.add_argument(
        "--sizes", type=_parse_sizes, default=None, help="block sizes a:b[:step] (default 2:128)"
    )
    p_fig1.add_argument("--out", type=str, default="fig1_out", help="output directory")
    p_fig1.add_argument("--tol-override", action="append", metavar="NAME=VALUE")
    return parser


def cmd_classify(args, tol: Tolerances) -> int:
    spec = _load_spec(args, tol)
    classification = classify(spec, tol=tol)
    print(json.dumps(classification.to_json_dict(), sort_keys=True))
    return EXIT_OK


def cmd_report(args, tol: Tolerances) -> int:
    spec = _load_spec(args, tol)
    kernel = build_kernel(spec, tol=tol)
    report = full_report(kernel, args.n1, tol=tol)
    config = {
        "command": "report",
        "eta": args.eta,
        "n": args.n,
        "spec": args.spec,
        "n1": args.n1,
    }
    lines = [_provenance(config), report.csv_header(), report.csv_row()]
    print("\n".join(lines))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.csv").write_text("\n".join(lines) + "\n")
        (out / "report.json").write_text(
            json.dumps(report.to_json_dict(), sort_keys=True, indent=2) + "\n"
        )
    return EXIT_OK


def _fig1_sweep_id(eta: float) -> str:
    return f"fig1-eta-{eta:g}"


def cmd_fig1(args, tol: Tolerances) -> int:
    sizes = args.sizes if args.sizes is not None else list(range(2, 129))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = {"command": "fig1", "n": args.n, "sizes": [sizes[0], sizes[-1], len(sizes)]}

    curves = []
    fits = {}
    for eta in FIG1_ETAS:
        def builder(n, eta=eta):
            return build_eta_chain(EtaChainParams(eta=eta, n_sites=n), tol=tol)

        reports = list(
            entropy_sweep(builder, sizes, FIXED_N_VARY_BLOCK, fixed_n=args.n, tol=tol)
        )
        rows = [_provenance(dict(config, eta=eta)), "sweep_id,N,N1,eta_or_spec_hash,S,I,lower,upper"]
        for rep in reports:
            rows.append(
                f"{_fig1_sweep_id(eta)},{rep.n_sites},{rep.n1},{eta:g},{rep.entropy!r},"
                f"{rep.mutual_information!r},{rep.det_lower_bound!r},{rep.negativity_upper_bound!r}"
            )
        (out / f"fig1_eta_{eta:g}.csv").write_text("\n".join(rows) + "\n")

        n1s = [rep.n1 for rep in reports]
        entropies = [rep.entropy for rep in reports]
        curves.append((f"eta={eta:g}", n1s, entropies))
        fit_n1 = [n for n in n1s if n >= 8]
        fit_s = [s for n, s in zip(n1s, entropies) if n >= 8]
        if len(fit_n1) >= 3:
            fits[_fig1_sweep_id(eta)] = fit_entropy_log_growth(args.n, fit_n1, fit_s).to_json_dict()

    (out / "fig1_fits.json").write_text(json.dumps(fits, sort_keys=True, indent=2) + "\n")
    (out / "fig1.svg").write_text(
        line_plot_svg(curves, f"Block entropy, N={args.n}", "block size N1", "S (nats)")
    )
    print(f"wrote {len(curves)} curves to {out}")
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = _parse_tol_overrides(args.tol_override)
    except (argparse.ArgumentTypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC

    if args.command in ("classify", "report"):
        _check_spec_source(args, parser)
    try:
        if args.command == "classify":
            return cmd_classify(args, tol)
        if args.command == "report":
            return cmd_report(args, tol)
        if args.command == "fig1":
            return cmd_fig1(args, tol)
        parser.error(f"unknown command {args.command!r}")
    except (NotPositive, NotSymmetric) as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except IntegrityError as exc:
        print(f"numerical integrity failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"i/o error: malformed spec document: {exc}", file=sys.stderr)
        return EXIT_IO
    except (HarmentError, ValueError, KeyError) as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
