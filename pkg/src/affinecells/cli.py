"""Command-line front end: enumerate, verify, render, stats.

Exit codes: 0 success, 1 verification mismatch, 2 usage/parse error,
3 numerical failure (including --strict runs with skipped candidates).
AFFINECELLS_EPS_FEAS overrides the feasibility tolerance for debugging.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .enumeration import (
    EnumerationResult,
    find_cpas,
    result_to_json,
    sign_key_from_string,
)
from .geometry import EPS_FEAS, HPolytope, Tolerances, load_polytope
from .lp import LPNumericalError
from .network import Network, StructuralError, load_network, slice_network
from .oracle import enumerate_patterns_bruteforce, grid_sample_patterns
from .report import (
    RenderSpec,
    label_regions,
    per_layer_counts_csv,
    render_svg_2d,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


def _tolerances() -> Tolerances:
    env = os.environ.get("AFFINECELLS_EPS_FEAS")
    if env is None:
        return Tolerances()
    try:
        return Tolerances(eps_feas=float(env))
    except ValueError as exc:
        raise UsageError(f"bad AFFINECELLS_EPS_FEAS value {env!r}") from exc


def _parse_csv_floats(text: str, what: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",") if t.strip() != ""])
    except ValueError as exc:
        raise UsageError(f"could not parse {what} as comma-separated floats: {text!r}") from exc


def _load_inputs(args) -> tuple[Network, HPolytope]:
    try:
        net = load_network(args.network)
    except (OSError, json.JSONDecodeError, StructuralError, ValueError) as exc:
        raise UsageError(f"cannot load network {args.network}: {exc}") from exc
    if args.domain is not None:
        try:
            domain = load_polytope(args.domain)
        except (OSError, json.JSONDecodeError, ValueError) as exc:
            raise UsageError(f"cannot load domain {args.domain}: {exc}") from exc
    elif args.box is not None:
        dim = int(args.box[0])
        half = float(args.box[1]) if len(args.box) > 1 else 1.0
        domain = HPolytope.box(dim, half)
    else:
        raise UsageError("either --domain or --box is required")
    return net, domain


def _apply_slice(net: Network, args) -> Network:
    if args.slice is None:
        return net
    base = _parse_csv_floats(args.slice[0], "--slice BASE")
    d1 = _parse_csv_floats(args.slice[1], "--slice DIR1")
    d2 = _parse_csv_floats(args.slice[2], "--slice DIR2")
    try:
        return slice_network(net, base, d1, d2)
    except ValueError as exc:
        raise UsageError(f"bad slice: {exc}") from exc


def _enumerate(net: Network, domain: HPolytope, args) -> EnumerationResult:
    seed = None
    if args.seed_point is not None:
        seed = _parse_csv_floats(args.seed_point, "--seed-point")
    return find_cpas(net, domain, seed=seed, workers=args.workers, tol=_tolerances())


def _report_path(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out / "report.json"


def cmd_enumerate(args) -> int:
    net, domain = _load_inputs(args)
    net = _apply_slice(net, args)
    result = _enumerate(net, domain, args)
    path = _report_path(args)
    doc = result_to_json(result, network_path=str(args.network), domain_path=str(args.domain or ""))
    path.write_text(json.dumps(doc, indent=1), encoding="utf-8")
    print(f"regions: {len(result.regions)}")
    print(f"per-layer counts: {list(result.per_layer_counts)}")
    print(f"report: {path}")
    if args.strict and result.stats.skipped_candidates > 0:
        print(
            f"strict: {result.stats.skipped_candidates} candidates skipped; completeness unverified",
            file=sys.stderr,
        )
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_verify(args) -> int:
    net, domain = _load_inputs(args)
    net = _apply_slice(net, args)
    if net.total_activation_neurons > 20:
        raise UsageError(
            f"{net.total_activation_neurons} activation neurons exceed the brute-force cap of 20"
        )
    path = _report_path(args)
    if path.exists():
        doc = json.loads(path.read_text(encoding="utf-8"))
        enumerated = {sign_key_from_string(r["sign_key"]) for r in doc["regions"]}
    else:
        result = _enumerate(net, domain, args)
        doc = result_to_json(result, network_path=str(args.network), domain_path=str(args.domain or ""))
        enumerated = {r.sign_key for r in result.regions}

    oracle = enumerate_patterns_bruteforce(net, domain, tol=_tolerances())
    missing = sorted(oracle.patterns - enumerated)
    extra = sorted(enumerated - oracle.patterns)
    block = {
        "method": oracle.method,
        "pattern_count": len(oracle.patterns),
        "match": not missing and not extra,
        "missing": ["".join("+" if b > 0 else "-" for b in k) for k in missing],
        "extra": ["".join("+" if b > 0 else "-" for b in k) for k in extra],
    }
    if args.resolution is not None:
        grid = grid_sample_patterns(net, domain, args.resolution)
        block["grid"] = {
            "resolution": args.resolution,
            "pattern_count": len(grid.patterns),
            "subset": grid.patterns <= oracle.patterns,
        }
    doc["oracle"] = block
    path.write_text(json.dumps(doc, indent=1), encoding="utf-8")
    print(f"oracle patterns: {block['pattern_count']}  match: {block['match']}")
    return EXIT_OK if block["match"] else EXIT_MISMATCH


def cmd_render(args) -> int:
    net, domain = _load_inputs(args)
    net = _apply_slice(net, args)
    if net.input_dim != 2 or domain.dim != 2:
        raise UsageError("rendering needs a 2D domain; pass --slice BASE DIR1 DIR2 for d0 > 2")
    result = _enumerate(net, domain, args)
    labeled = label_regions(net, result)
    spec = RenderSpec(mode=args.mode, color_seed=args.color_seed, band=args.band)
    svg = render_svg_2d(labeled, spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "partition.svg"
    path.write_text(svg, encoding="utf-8")
    print(f"regions: {len(result.regions)}")
    print(f"svg: {path}")
    return EXIT_OK


def cmd_stats(args) -> int:
    path = _report_path(args)
    if path.exists():
        doc = json.loads(path.read_text(encoding="utf-8"))
        counts = doc["per_layer_counts"]
        csv = "layer,count\n" + "".join(f"{i},{c}\n" for i, c in enumerate(counts, start=1))
    else:
        net, domain = _load_inputs(args)
        net = _apply_slice(net, args)
        result = _enumerate(net, domain, args)
        csv = per_layer_counts_csv(result)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "per_layer_counts.csv"
    csv_path.write_text(csv, encoding="utf-8")
    print(csv, end="")
    print(f"csv: {csv_path}", file=sys.stderr)
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--network", required=True, help="network interchange JSON")
    p.add_argument("--domain", help="domain polytope JSON (Ax + b >= 0)")
    p.add_argument("--box", nargs="+", metavar=("D", "H"), help="box domain [-H, H]^D (H default 1)")
    p.add_argument("--seed-point", help="comma-separated interior start point")
    p.add_argument("--workers", type=int, default=1, help="parallel region expansion workers")
    p.add_argument("--strict", action="store_true", help="fail when candidates were skipped")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--slice", nargs=3, metavar=("BASE", "DIR1", "DIR2"), help="2D slice for d0 > 2")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="affinecells",
        description="Exact affine-region enumeration for piecewise-affine networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="enumerate regions and write report.json")
    _add_common(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("verify", help="compare against the brute-force pattern oracle")
    _add_common(p)
    p.add_argument("--resolution", type=int, help="also run the grid-sampling baseline")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("render", help="render the 2D partition to SVG")
    _add_common(p)
    p.add_argument(
        "--mode",
        choices=["region_id", "class_label", "boundary_band"],
        default="region_id",
    )
    p.add_argument("--band", type=float, default=0.05, help="boundary band epsilon (output units)")
    p.add_argument("--color-seed", type=int, default=0)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("stats", help="write per-layer region counts as CSV")
    _add_common(p)
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LPNumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        # bad geometry inputs: non-interior seed, unbounded or empty domain
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
