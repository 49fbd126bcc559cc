"""Command-line front end.

Every subcommand reads a channel JSON document and writes JSON (or CSV where
noted) to ``--out`` or standard output.  Exit codes: 0 success, 1 domain error
(infeasible rates, hypothesis violation, projection mismatch), 2 usage or parse
error.  Errors are reported on standard error as
``{"error": code, "detail": {...}}``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import config, regions
from .channel import ChannelError, parse_channel
from .infomeasures import MIEngine, VariableSet
from .polytope import (Polytope, ccw_polygon, contains, fm_eliminate_all, normalize, remove_redundant,
                       vertex_array, vertices_csv)


class UsageError(Exception):
    def __init__(self, code: str, message: str, **detail):
        super().__init__(message)
        self.code = code
        self.detail = {"message": message, **detail}


class DomainError(Exception):
    def __init__(self, code: str, message: str, **detail):
        super().__init__(message)
        self.code = code
        self.detail = {"message": message, **detail}


def _round(obj):
    if isinstance(obj, float):
        return float(format(obj, ".12g"))
    if isinstance(obj, np.floating):
        return float(format(float(obj), ".12g"))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_round(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(_round(obj), indent=2) + "\n"


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


# --- argument helpers ----------------------------------------------------------------

def parse_partition(text: str | None, K: int) -> int:
    if text is None:
        return (1 << K) - 1
    text = text.strip()
    if not text:
        return 0
    try:
        users = [int(u) for u in text.split(",")]
    except ValueError:
        raise UsageError("partition", f"partition must list user numbers, got {text!r}") from None
    bad = [u for u in users if not 1 <= u <= K]
    if bad:
        raise UsageError("partition", f"users {bad} outside 1..{K}", users=bad, num_users=K)
    return regions.users_mask(users)


def parse_rates(text: str, K: int) -> regions.RateTuple:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError("rates", f"rates must be numbers, got {text!r}") from None
    if len(values) != 2 * K:
        raise UsageError("rates", f"expected {2 * K} rates (R1s,R1o,...,R{K}s,R{K}o), got {len(values)}")
    try:
        return regions.RateTuple.from_vector(values)
    except ValueError as exc:
        raise UsageError("rates", str(exc)) from None


def parse_varset(text: str, K: int) -> VariableSet:
    mask, y, z = 0, False, False
    for tok in filter(None, (t.strip().upper() for t in (text or "").split(","))):
        if tok == "Y":
            y = True
        elif tok == "Z":
            z = True
        elif tok.startswith("X") and tok[1:].isdigit() and 1 <= int(tok[1:]) <= K:
            mask |= 1 << (int(tok[1:]) - 1)
        else:
            raise UsageError("variables", f"unknown variable {tok!r}; use X1..X{K}, Y, Z")
    return VariableSet(mask, y, z)


def parse_fixed(text: str | None) -> dict[str, float]:
    out = {}
    for item in filter(None, (t.strip() for t in (text or "").split(","))):
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError("fix", f"expected NAME=VALUE, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise UsageError("fix", f"value of {name.strip()} is not a number") from None
    return out


def load_channel(path: str):
    try:
        text = Path(path).read_text() if path != "-" else sys.stdin.read()
    except OSError as exc:
        raise UsageError("io", f"cannot read {path}: {exc.strerror}", path=path) from None
    return parse_channel(text)


# --- slicing -------------------------------------------------------------------------

def export_slice(polytope: Polytope, axes: tuple[str, str], fixed: dict[str, float]) -> np.ndarray:
    """2-D cross-section: substitute ``fixed``, project out everything except
    ``axes`` and return the polygon's vertices counterclockwise."""
    if len(axes) != 2 or axes[0] == axes[1]:
        raise UsageError("axes", "slice needs two distinct axis variables")
    for name in list(axes) + list(fixed):
        if name not in polytope.vars:
            raise UsageError("axes", f"unknown variable {name!r}", variables=list(polytope.vars))
    overlap = set(axes) & set(fixed)
    if overlap:
        raise UsageError("axes", f"axis variables cannot also be fixed: {sorted(overlap)}")
    p = polytope.substitute(fixed) if fixed else polytope
    rest = [v for v in p.vars if v not in axes]
    p = fm_eliminate_all(p, rest)
    p = remove_redundant(normalize(p)).reorder(axes) if len(p) else p.reorder(axes)
    return ccw_polygon(p)


def slice_csv(axes, blocks: list[tuple[str | None, np.ndarray]]) -> str:
    labelled = any(label is not None for label, _ in blocks)
    header = (["partition"] if labelled else []) + list(axes)
    lines = [",".join(header)]
    for label, pts in blocks:
        for row in pts:
            cells = [_fmt(v) for v in row]
            lines.append(",".join(([label] if labelled else []) + cells))
    return "\n".join(lines) + "\n"


# --- subcommands ---------------------------------------------------------------------

def _partition_label(mask: int) -> str:
    return "{" + " ".join(str(u) for u in regions.mask_users(mask)) + "}"


def cmd_validate(args, spec, eng):
    return {"valid": True, "users": spec.num_users, "user_alphabets": list(spec.user_alphabets),
            "y_size": spec.y_alphabet, "z_size": spec.z_alphabet}


def cmd_mi(args, spec, eng):
    K = spec.num_users
    left = parse_varset(args.left, K)
    right = parse_varset(args.right, K)
    given = parse_varset(args.given, K)
    if left.is_empty() or right.is_empty():
        raise UsageError("variables", "--left and --right must name at least one variable")
    try:
        value = eng.mi(left, right, given)
    except ValueError as exc:
        raise UsageError("variables", str(exc)) from None
    return {"left": str(left), "right": str(right), "given": str(given), "value": value}


def _region_output(args, desc: regions.RegionDescriptor):
    if args.format == "csv":
        return vertices_csv(desc.polytope)
    return desc.to_dict()


def cmd_region(args, spec, eng):
    kp = parse_partition(args.partition, spec.num_users)
    return _region_output(args, regions.build_region(eng, kp, clamped=not args.unclamped))


def cmd_region_union(args, spec, eng):
    descs = regions.region_union(eng, clamped=not args.unclamped, threads=args.threads)
    if args.format == "csv":
        blocks = [(_partition_label(d.partition), vertex_array(d.polytope)) for d in descs]
        return slice_csv(descs[0].polytope.vars, blocks)
    return {"regions": [d.to_dict() for d in descs]}


def cmd_secrecy_region(args, spec, eng):
    if args.legacy:
        desc = regions.build_secrecy_region(eng, legacy=True)
    else:
        desc = regions.build_secrecy_region(eng, parse_partition(args.partition, spec.num_users))
    return _region_output(args, desc)


def cmd_check(args, spec, eng):
    K = spec.num_users
    rates = parse_rates(args.rates, K)
    if args.region:
        try:
            doc = json.loads(Path(args.region).read_text())
            poly = Polytope.from_dict(doc)
        except (OSError, ValueError) as exc:
            raise UsageError("region", f"cannot load region {args.region}: {exc}") from None
        point = rates.vector()
        if poly.dim != point.size:
            raise UsageError("region", f"region has {poly.dim} variables, rates give {point.size}")
        inside = contains(poly, point)
        kp = regions.users_mask(doc.get("partition", [])) if "partition" in doc else None
    else:
        kp = parse_partition(args.partition, K)
        inside = regions.build_region(eng, kp, clamped=not args.unclamped).contains(rates.vector())
    return {"inside": inside, "partition": None if kp is None else regions.mask_users(kp),
            "rates": rates.values()}


def cmd_garbage(args, spec, eng):
    kp = parse_partition(args.partition, spec.num_users)
    rates = parse_rates(args.rates, spec.num_users)
    res = regions.find_garbage_rates(eng, kp, rates)
    if not res.feasible:
        raise DomainError("infeasible", "no garbage rates satisfy the system at this tuple",
                          partition=regions.mask_users(kp), rates=rates.values())
    return {"feasible": True, "partition": regions.mask_users(kp), "garbage_rates": res.rates}


def cmd_fm_verify(args, spec, eng):
    kp = parse_partition(args.partition, spec.num_users)
    try:
        rep = regions.verify_fm_projection(eng, kp)
    except regions.HypothesisError as exc:
        raise DomainError("hypothesis", str(exc), S=regions.mask_users(exc.subset),
                          partition=regions.mask_users(kp), bob=exc.bob, eve=exc.eve) from None
    out = {"match": rep.match, "partition": regions.mask_users(kp),
           "trace": [{"var": s.var, "upper": s.upper, "lower": s.lower, "pairs": s.pairs,
                      "total": s.total} for s in rep.trace],
           "projected": rep.projected.to_dict(), "direct": rep.direct.to_dict()}
    if not rep.match:
        raise DomainError("mismatch", "projection differs from the direct region", report=out)
    return out


def cmd_max_secrecy(args, spec, eng):
    best = regions.max_sum_secrecy(eng)
    try:
        open_rate = regions.max_open_at_max_secrecy(eng)
    except regions.ZeroSecrecyError:
        open_rate = None
    return {"value": best.value, "partition": regions.mask_users(best.partition),
            "open_rate": open_rate}


def cmd_compare_secrecy(args, spec, eng):
    rep = regions.compare_secrecy_regions(eng)
    return {"relation": rep.relation, "condition": rep.condition,
            "claimed_relation": rep.claimed_relation,
            "witness": None if rep.witness is None else rep.witness,
            "differences": rep.differences}


def cmd_reduce_partition(args, spec, eng):
    kp = parse_partition(args.partition, spec.num_users)
    red = regions.reduce_partition(eng, kp)
    return {"partition": regions.mask_users(kp), "k0": regions.mask_users(red.k0),
            "k2": regions.mask_users(red.k2),
            "violating": [regions.mask_users(v) for v in red.violating]}


def cmd_slice(args, spec, eng):
    K = spec.num_users
    axes = tuple(a.strip() for a in args.axes.split(","))
    fixed = parse_fixed(args.fix)
    if args.kind == "rate":
        build = lambda m: regions.build_region(eng, m, clamped=not args.unclamped)  # noqa: E731
    else:
        build = lambda m: regions.build_secrecy_region(eng, m)  # noqa: E731
    if args.kind == "legacy-secrecy":
        descs = [regions.build_secrecy_region(eng, legacy=True)]
        labels = [None]
    elif args.union:
        descs = [build(m) for m in range(1 << K)]
        labels = [_partition_label(d.partition) for d in descs]
    else:
        descs = [build(parse_partition(args.partition, K))]
        labels = [None]
    blocks = [(label, export_slice(d.polytope, axes, fixed)) for label, d in zip(labels, descs)]
    return slice_csv(axes, blocks)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="macwt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help, partition=False, rates=False, csv=False):
        p = sub.add_parser(name, help=help)
        p.add_argument("channel", help="channel JSON file ('-' for stdin)")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--tol", help="tolerance overrides: FLOAT or name=value,...")
        if partition:
            p.add_argument("--partition", default=None,
                           help="comma separated users of K' (default: all users; '' for none)")
        if rates:
            p.add_argument("--rates", required=True, help="R1s,R1o,...,RKs,RKo")
        p.set_defaults(func=func, csv_ok=csv)
        return p

    add("validate", cmd_validate, "check a channel document")
    p = add("mi", cmd_mi, "conditional mutual information in bits")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--given", default="")
    p = add("region", cmd_region, "rate region for one partition", partition=True, csv=True)
    p.add_argument("--unclamped", action="store_true")
    p = add("region-union", cmd_region_union, "rate regions for every partition", csv=True)
    p.add_argument("--unclamped", action="store_true")
    p = add("secrecy-region", cmd_secrecy_region, "secret-rate-only region", partition=True, csv=True)
    p.add_argument("--legacy", action="store_true", help="single region without partition")
    p = add("check", cmd_check, "membership of a rate tuple", partition=True, rates=True)
    p.add_argument("--region", help="region JSON written by 'region'")
    p.add_argument("--unclamped", action="store_true")
    add("garbage", cmd_garbage, "garbage rates by LP", partition=True, rates=True)
    add("fm-verify", cmd_fm_verify, "check projection of the garbage system", partition=True)
    add("max-secrecy", cmd_max_secrecy, "maximum sum secrecy rate and open rate")
    add("compare-secrecy", cmd_compare_secrecy, "single secrecy region vs partition union")
    add("reduce-partition", cmd_reduce_partition, "split K' into K0 and K''", partition=True)
    p = add("slice", cmd_slice, "2-D cross-section as CSV", partition=True, csv=True)
    p.add_argument("--axes", required=True, help="two variable names, e.g. R1s,R2s")
    p.add_argument("--fix", default="", help="NAME=VALUE,... for non-axis variables")
    p.add_argument("--kind", choices=["rate", "secrecy", "legacy-secrecy"], default="rate")
    p.add_argument("--union", action="store_true", help="one block per partition")
    p.add_argument("--unclamped", action="store_true")
    return parser


def _error(code: str, detail: dict) -> None:
    sys.stderr.write(json.dumps(_round({"error": code, "detail": detail})) + "\n")


def run(argv=None) -> int:
    """Execute one command; tolerance overrides last only for this call."""
    try:
        return _run(argv)
    finally:
        config.reset()


def _run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config.reset()
        config.load_env()
        if args.tol:
            config.apply_overrides(config.parse_overrides(args.tol))
    except ValueError as exc:
        _error("tolerance", {"message": str(exc)})
        return 2
    try:
        spec = load_channel(args.channel)
        if args.format == "csv" and not args.csv_ok:
            raise UsageError("format", f"{args.command} has no CSV output")
        result = args.func(args, spec, MIEngine(spec))
    except ChannelError as exc:
        _error(exc.code, {"message": str(exc), **exc.detail})
        return 2
    except UsageError as exc:
        _error(exc.code, exc.detail)
        return 2
    except DomainError as exc:
        _error(exc.code, exc.detail)
        return 1
    text = result if isinstance(result, str) else dumps(result)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())
