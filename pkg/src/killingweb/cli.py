"""Command-line front end: ``killingweb <subcommand> ...``.

Exit status is 0 on success, 2 on usage errors (bad flags, unreadable or
malformed input) and 1 on domain errors (input is not a CKT, degenerate
canonical form, ...).  JSON output carries a top-level schema key.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import canonical as _canonical
from . import classify as _classify
from .canonical import ESSENTIAL, to_canonical
from .charts import COORDINATES
from .classify import DomainError, WebClass, classify_web
from .exactmath import UsageError, format_rational
from .invariants import full_invariants, kv_invariants, xi_invariants
from .killing import PARAMS, KTParams, KVParams
from .pipeline import CombinationPolicy, find_separable_webs
from .potential import parse_const_binding, parse_potential

SCHEMA = "killing-web/1"

_SIGNATURES = {
    WebClass.CARTESIAN: "constant tensor; translational with D1 = 0, D2 = 0",
    WebClass.CIRCULAR_CYLINDRICAL: "translational D1 != 0, D2 = 0; rotational D1 = D2 = 0; "
                                   "or any helicoidal symmetry",
    WebClass.PARABOLIC_CYLINDRICAL: "translational D1 = 0, D2 != 0",
    WebClass.ELLIPTIC_HYPERBOLIC: "translational D1 != 0, D2 != 0",
    WebClass.SPHERICAL: "rotational D1 != 0, D2 = 0",
    WebClass.PROLATE_SPHEROIDAL: "rotational D1 != 0, D2 > 0",
    WebClass.OBLATE_SPHEROIDAL: "rotational D1 != 0, D2 < 0",
    WebClass.PARABOLIC: "rotational D1 = 0, D2 != 0",
    WebClass.CONICAL: "no symmetry; Xi3 != 0 and Xi4 = Xi5 = Xi6 = 0",
    WebClass.PARABOLOIDAL: "no symmetry; Xi1 = Xi2 = 0",
    WebClass.ELLIPSOIDAL: "no symmetry; Xi3 = 0, or Xi4..Xi6 not all zero",
}


@dataclass
class CliConfig:
    tau_class: float = _classify.TAU_CLASS
    tau_canon: float = _canonical.TAU_CANON
    combo_range: int = 2
    output_format: str = "json"
    emit_charts: Path | None = None

    def __post_init__(self):
        if not (self.tau_class > 0 and self.tau_canon > 0):
            raise UsageError("tolerances must be positive")
        if self.combo_range < 0:
            raise UsageError("--combo-range must be >= 0")

    def install(self) -> None:
        _classify.TAU_CLASS = self.tau_class
        _canonical.TAU_CANON = self.tau_canon


# ------------------------------------------------------------ input

def _read_json(path: str) -> dict:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(data, dict):
        raise UsageError(f"{path}: expected a JSON object")
    data.pop("schema", None)
    return data


def load_kt(path: str) -> KTParams:
    """Killing tensor from JSON: either block form (a, alpha, b, c, gamma) or named parameters."""
    data = _read_json(path)
    if "tensor" in data and isinstance(data["tensor"], dict):
        data = data["tensor"]
    if data and set(data) <= set(PARAMS):
        return KTParams.from_named(data)
    if set(data) <= {"a", "alpha", "b", "c", "gamma"}:
        return KTParams.from_json(data)
    raise UsageError(f"{path}: unrecognized Killing tensor keys {sorted(data)}")


def load_kv(path: str) -> KVParams:
    data = _read_json(path)
    if set(data) != {"a", "c"}:
        raise UsageError(f"{path}: a Killing vector needs exactly the keys a and c")
    return KVParams.from_json(data)


# ----------------------------------------------------------- output

def _emit(payload: dict, text: str, cfg: CliConfig, out) -> None:
    if cfg.output_format == "json":
        out.write(json.dumps({"schema": SCHEMA, **payload}, indent=2) + "\n")
    else:
        out.write(text.rstrip("\n") + "\n")


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    return format_rational(v)


def _chart_text(chart) -> list[str]:
    lines = [f"  web: {chart.web.pretty()}  coordinates: ({', '.join(chart.coordinates)})"]
    if chart.essential:
        lines.append("  essential: " + ", ".join(f"{k} = {v:.12g}" for k, v in chart.essential.items()))
    lam = [[float(v) for v in r] for r in chart.frame.lam]
    lines.append("  lambda: " + "; ".join(" ".join(f"{v: .6f}" for v in r) for r in lam))
    lines.append("  delta: " + " ".join(f"{float(v): .6f}" for v in chart.frame.delta))
    return lines


# ------------------------------------------------------- subcommands

def cmd_classify(args, cfg: CliConfig, out) -> None:
    report = classify_web(load_kt(args.input))
    lines = [f"web: {report.web.pretty()}",
             f"symmetry algebra dimension: {len(report.symmetry_basis)}"]
    for inv in report.invariant_trace:
        lines.append(f"{inv.kind} invariants: " + ", ".join(_fmt(v) for v in inv.values))
    _emit(report.to_json(), "\n".join(lines), cfg, out)


def cmd_invariants(args, cfg: CliConfig, out) -> None:
    if args.kv:
        inv = kv_invariants(load_kv(args.input))
        _emit({"kv": inv.to_json()},
              "\n".join(f"D{i + 1} = {_fmt(v)}" for i, v in enumerate(inv.values)), cfg, out)
        return
    delta = full_invariants(load_kt(args.input))
    xi = xi_invariants(delta)
    lines = [f"D{i + 1} = {_fmt(v)}" for i, v in enumerate(delta.values)]
    lines += [f"Xi{i + 1} = {_fmt(v)}" for i, v in enumerate(xi.values)]
    _emit({"delta": delta.to_json(), "xi": xi.to_json()}, "\n".join(lines), cfg, out)


def cmd_canonical(args, cfg: CliConfig, out) -> None:
    K = load_kt(args.input)
    web = None
    if args.web:
        try:
            web = WebClass(args.web.upper().replace("-", "_"))
        except ValueError:
            raise UsageError(f"unknown web {args.web!r}") from None
    chart = to_canonical(K, web)
    _emit(chart.to_json(), "\n".join(_chart_text(chart)), cfg, out)


def cmd_separable(args, cfg: CliConfig, out) -> None:
    consts = dict(parse_const_binding(s) for s in args.const)
    V = parse_potential(args.potential, consts)
    report = find_separable_webs(V, CombinationPolicy(range=cfg.combo_range), args.potential)
    payload = report.to_json()
    payload["constants"] = {k: format_rational(v) for k, v in sorted(consts.items())}
    if cfg.emit_charts is not None:
        cfg.emit_charts.mkdir(parents=True, exist_ok=True)
        for i, d in enumerate(report.ckts):
            path = cfg.emit_charts / f"chart_{i:03d}_{d.report.web.value.lower()}.json"
            path.write_text(json.dumps({"schema": SCHEMA, **d.chart.to_json()}, indent=2) + "\n")
    lines = [f"potential: {args.potential}",
             f"compatible space dimension: {report.compatible_space.dimension}",
             f"combinations classified: {report.combinations_tried}",
             "separable webs: " + ", ".join(w.pretty() for w in report.distinct_webs)]
    for d in report.ckts:
        coeffs = " ".join(_fmt(c) for c in d.coefficients)
        lines.append(f"- [{coeffs}]")
        lines.extend(_chart_text(d.chart))
    _emit(payload, "\n".join(lines), cfg, out)


def cmd_webs(args, cfg: CliConfig, out) -> None:
    rows = []
    for w in WebClass:
        rows.append({"web": w.value, "symmetry": w.group,
                     "coordinates": list(COORDINATES[w]),
                     "essential": list(ESSENTIAL.get(w, ())),
                     "signature": _SIGNATURES[w]})
    width = max(len(w.pretty()) for w in WebClass)
    lines = [f"{WebClass(r['web']).pretty():<{width}}  {r['symmetry']:<13}  {r['signature']}"
             for r in rows]
    _emit({"webs": rows}, "\n".join(lines), cfg, out)


# ------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="killingweb",
                                description="Orthogonal separable webs of Killing tensors in flat 3-space.")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--tau-class", type=float, default=_classify.TAU_CLASS,
                   help="relative zero tolerance for branch decisions after a floating alignment")
    p.add_argument("--tau-canon", type=float, default=_canonical.TAU_CANON,
                   help="relative residual allowed for canonical forms")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("classify-kt", help="classify a Killing tensor")
    s.add_argument("--input", required=True, help="JSON file ('-' for stdin)")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("invariants", help="Delta and Xi invariants")
    s.add_argument("--input", required=True)
    s.add_argument("--kv", action="store_true", help="input is a Killing vector")
    s.set_defaults(func=cmd_invariants)

    s = sub.add_parser("canonical", help="canonical frame and essential parameters")
    s.add_argument("--input", required=True)
    s.add_argument("--web", help="expected web label; mismatch is an error")
    s.set_defaults(func=cmd_canonical)

    s = sub.add_parser("separable", help="separable webs of a potential")
    s.add_argument("--potential", required=True)
    s.add_argument("--const", action="append", default=[], metavar="NAME=P/Q")
    s.add_argument("--combo-range", type=int, default=2)
    s.add_argument("--emit-charts", type=Path, metavar="DIR")
    s.set_defaults(func=cmd_separable)

    s = sub.add_parser("webs", help="print the eleven webs and their invariant signatures")
    s.set_defaults(func=cmd_webs)
    return p


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    saved = (_classify.TAU_CLASS, _canonical.TAU_CANON)
    try:
        cfg = CliConfig(args.tau_class, args.tau_canon, getattr(args, "combo_range", 2),
                        args.format, getattr(args, "emit_charts", None))
        cfg.install()
        args.func(args, cfg, out)
        return 0
    except DomainError as exc:
        err.write(f"killingweb: error: {exc}\n")
        return 1
    except UsageError as exc:
        err.write(f"killingweb: usage error: {exc}\n")
        return 2
    finally:
        _classify.TAU_CLASS, _canonical.TAU_CANON = saved


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
