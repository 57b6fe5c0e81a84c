"""Command-line front end: ``contracalc {validate|compute|verify}``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

from . import chartspec, scalar
from .chartspec import ChartSpecError
from .scalar import ParseError
from .tensor import Form, MultiVector, parse_tensor, tensor_text
from .suites import SuiteConfig, run_suite, suite_names

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

OPERATORS = (
    "schouten",
    "coboundary",
    "delta",
    "curl",
    "modular-vector",
    "modular-op",
    "star",
    "nabla",
    "curvature",
    "hamiltonian",
)

# operand kinds per operator: "m" multivector, "f" form, "1" vector field, "1f" 1-form
_OPERANDS = {
    "schouten": ("m", "m"),
    "coboundary": ("m",),
    "delta": ("f",),
    "curl": ("m",),
    "modular-vector": (),
    "modular-op": ("m",),
    "star": ("f",),
    "nabla": ("1", "f"),
    "curvature": ("1f", "1f", "m"),
    "hamiltonian": ("s",),
}


class UsageError(Exception):
    """Bad arguments or operands; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    chart: str
    trials: int = scalar.DEFAULT_TRIALS
    seed: int = 0
    max_degree: int = 3
    format: str = "text"
    cases: int | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise UsageError("--trials must be >= 1")
        if self.max_degree < 0:
            raise UsageError("--max-degree must be >= 0")
        if self.cases is not None and self.cases < 1:
            raise UsageError("--cases must be >= 1")


def _default_trials() -> int:
    raw = os.environ.get("CONTRACALC_TRIALS")
    if raw is None:
        return scalar.DEFAULT_TRIALS
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"CONTRACALC_TRIALS must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--chart", required=True, help="chart-spec file (.chart.json)")
    common.add_argument("--trials", type=int, default=None, help="evaluation points per identity check")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--max-degree", type=int, default=3, help="degree bound for random inputs")
    common.add_argument("--format", choices=("text", "json"), default="text")

    p = argparse.ArgumentParser(prog="contracalc", description="Exact calculus of multivectors and forms on Poisson charts.")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common], help="check every invariant a chart file declares")

    c = sub.add_parser("compute", parents=[common], help="apply one operator to operands")
    c.add_argument("operator", choices=OPERATORS)
    c.add_argument("--input", action="append", default=[], metavar="TENSOR", help="operand in tensor syntax (repeatable)")
    c.add_argument("--grade", type=int, action="append", default=[], metavar="K",
                   help="grade of the matching --input, needed when it is a bare scalar or 0")
    c.add_argument("--volume", metavar="EXPR", help="volume coefficient replacing the chart's")

    v = sub.add_parser("verify", parents=[common], help="run randomized identity suites")
    v.add_argument("suite_pos", nargs="?", metavar="SUITE", choices=suite_names())
    v.add_argument("--suite", choices=suite_names())
    v.add_argument("--cases", type=int, default=None, help="override the per-identity instance count")
    return p


def _config(args) -> RunConfig:
    trials = args.trials if args.trials is not None else _default_trials()
    return RunConfig(args.chart, trials, args.seed, args.max_degree, args.format, getattr(args, "cases", None))


def _emit(fmt: str, doc: dict, lines: list[str], out) -> None:
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        out.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------- validate


def cmd_validate(cfg: RunConfig, out=None) -> int:
    bundle = chartspec.load(cfg.chart, check=False, trials=cfg.trials, seed=cfg.seed)
    checks = chartspec.run_checks(bundle, cfg.trials, cfg.seed)
    ok = all(passed for _, passed in checks)
    doc = {
        "chart": bundle.name or cfg.chart,
        "checks": [{"check": name, "status": "pass" if p else "fail"} for name, p in checks],
        "status": "pass" if ok else "fail",
    }
    lines = [f"{'PASS' if p else 'FAIL'}  {name}" for name, p in checks]
    lines.append(f"validate: {'pass' if ok else 'fail'}")
    _emit(cfg.format, doc, lines, out)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------- compute


def _operand(text: str, chart, kind: str, grade):
    try:
        if kind == "s":
            return scalar.parse_expr(text, chart)
        if kind in ("1", "1f"):
            T = parse_tensor(text, chart, kind="multivector" if kind == "1" else "form", grade=1)
        else:
            T = parse_tensor(text, chart, kind="multivector" if kind == "m" else "form", grade=grade)
    except ParseError as exc:
        raise UsageError(f"cannot parse operand {text!r}: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"operand {text!r}: {exc}") from exc
    return T


def compute(bundle, operator: str, operands, volume=None, trials=scalar.DEFAULT_TRIALS, seed=0):
    """Dispatch one operator; raises UsageError when it does not apply."""
    from . import connection, poisson, symplectic
    from . import volume as vol_mod

    pi = bundle.pi
    vol = volume or bundle.volume

    def need_sym():
        if bundle.symplectic is None:
            raise UsageError(f"{operator} needs a symplectic block in the chart")
        return bundle.symplectic

    def need_conn():
        if bundle.connection is None:
            raise UsageError(f"{operator} needs a connection in the chart")
        return bundle.connection

    if operator == "schouten":
        A, B = operands
        if A.grade + B.grade < 1:
            raise UsageError("schouten needs total grade >= 1")
        return poisson.schouten(A, B)
    if operator == "coboundary":
        return poisson.coboundary(pi, operands[0])
    if operator == "delta":
        return poisson.delta_brylinski(pi, operands[0])
    if operator == "curl":
        return vol_mod.curl(vol, operands[0])
    if operator == "modular-vector":
        return vol_mod.modular_vector_field(pi, vol)
    if operator == "modular-op":
        return vol_mod.modular_operator(pi, vol, operands[0])
    if operator == "star":
        return symplectic.star(need_sym(), operands[0])
    if operator == "nabla":
        S, D = need_sym(), need_conn()
        return symplectic.induced_nabla(S, D, operands[0], operands[1])
    if operator == "curvature":
        return connection.curvature(need_conn(), *operands)
    if operator == "hamiltonian":
        return poisson.hamiltonian(pi, operands[0])
    raise UsageError(f"unknown operator {operator}")


def cmd_compute(cfg: RunConfig, operator: str, inputs, grades, volume_text=None, out=None) -> int:
    bundle = chartspec.load(cfg.chart, trials=cfg.trials, seed=cfg.seed)
    kinds = _OPERANDS[operator]
    if len(inputs) != len(kinds):
        raise UsageError(f"{operator} takes {len(kinds)} --input operand(s), got {len(inputs)}")
    if len(grades) > len(inputs):
        raise UsageError("more --grade flags than --input operands")
    grades = list(grades) + [None] * (len(inputs) - len(grades))
    operands = [_operand(t, bundle.chart, k, g) for t, k, g in zip(inputs, kinds, grades)]
    vol = None
    if volume_text is not None:
        from .volume import VolumeError, VolumeForm

        try:
            m = scalar.parse_expr(volume_text, bundle.chart)
            vol = VolumeForm.from_coefficient(bundle.chart, m, trials=cfg.trials, seed=cfg.seed)
        except (ParseError, VolumeError) as exc:
            raise UsageError(f"--volume: {exc}") from exc
    result = compute(bundle, operator, operands, vol, cfg.trials, cfg.seed)
    text = tensor_text(result)
    kind = "multivector" if isinstance(result, MultiVector) else "form"
    doc = {"operator": operator, "grade": result.grade, "kind": kind, "result": text}
    _emit(cfg.format, doc, [text], out)
    return EXIT_OK


# ---------------------------------------------------------------- verify


def cmd_verify(cfg: RunConfig, suite: str, out=None) -> int:
    bundle = chartspec.load(cfg.chart, trials=cfg.trials, seed=cfg.seed)
    scfg = SuiteConfig(cfg.trials, cfg.seed, cfg.max_degree, cfg.cases)
    results = run_suite(bundle, suite, scfg)
    ok = all(r.ok for r in results)
    doc = {
        "chart": bundle.name or cfg.chart,
        "suite": suite,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "max_degree": cfg.max_degree,
        "results": [r.to_dict() for r in results],
        "status": "pass" if ok else "fail",
    }
    lines = []
    for r in results:
        tag = f"{r.suite}/{r.name}"
        if r.skipped:
            lines.append(f"SKIP  {tag}  ({r.skipped})")
        else:
            lines.append(f"{'PASS' if r.ok else 'FAIL'}  {tag}  {r.passed}/{r.cases}")
            if r.failure is not None:
                lines.append("      failing case " + json.dumps(
                    {"operands": r.failure["operands"], "case_seed": r.failure["case_seed"]}, sort_keys=True))
                lines.append("      chart " + json.dumps(r.failure["chart"], sort_keys=True))
    lines.append(f"verify {suite}: {'pass' if ok else 'fail'}")
    _emit(cfg.format, doc, lines, out)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------- entry point


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args)
        if args.command == "validate":
            return cmd_validate(cfg)
        if args.command == "compute":
            return cmd_compute(cfg, args.operator, args.input, args.grade, args.volume)
        suite = args.suite or args.suite_pos
        if suite is None:
            raise UsageError("verify needs a suite name")
        if args.suite and args.suite_pos and args.suite != args.suite_pos:
            raise UsageError("conflicting suite names")
        return cmd_verify(cfg, suite)
    except UsageError as exc:
        print(f"contracalc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ChartSpecError as exc:
        print(f"contracalc: chart check failed: {exc}", file=sys.stderr)
        # malformed documents are usage errors; failed invariants are verification failures
        return EXIT_USAGE if exc.check in ("schema", "parse", "json", "index-range", "index-order") else EXIT_FAIL
    except OSError as exc:
        print(f"contracalc: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
