"""The ``.chart.json`` format: a coordinate chart with its Poisson bivector,
volume form, optional connection and optional symplectic block.

Indices in documents are 1-based. A bivector or 2-form entry ``{i, j, expr}``
with i < j is the coefficient of e_i ^ e_j (resp. dx^i ^ dx^j); a connection
entry ``{i, j, k, expr}`` is the Christoffel section G^{ij}_k.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Any

from . import scalar
from .scalar import ONE, Chart, ParseError
from .tensor import Form, MultiVector
from .poisson import PoissonBivector, jacobi_check
from .volume import VolumeForm
from .connection import ContravariantConnection, is_poisson_connection, is_torsion_free
from .symplectic import SymplecticError, SymplecticStructure

__all__ = [
    "ChartSpecError",
    "ChartBundle",
    "from_dict",
    "loads",
    "load",
    "to_dict",
    "dumps",
    "save",
    "run_checks",
]


class ChartSpecError(ValueError):
    """Malformed or invalid document; ``check`` names the failed rule."""

    def __init__(self, check: str, message: str):
        self.check = check
        super().__init__(f"{check}: {message}")


@dataclass(frozen=True, eq=False)
class ChartBundle:
    """Everything a chart-spec file declares, as engine objects."""

    chart: Chart
    pi: PoissonBivector
    volume: VolumeForm
    connection: ContravariantConnection | None = None
    symplectic: SymplecticStructure | None = None
    # how the symplectic block was declared: "invert-poisson" or "omega"
    symplectic_source: str | None = None
    name: str | None = None
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------- reading


def _entries(doc: dict, key: str, arity: int) -> list[tuple]:
    raw = doc.get(key, [])
    if not isinstance(raw, list):
        raise ChartSpecError("schema", f"'{key}' must be a list")
    names = ("i", "j", "k")[:arity]
    out = []
    for pos, item in enumerate(raw):
        if isinstance(item, dict):
            missing = [n for n in (*names, "expr") if n not in item]
            if missing:
                raise ChartSpecError("schema", f"{key}[{pos}] lacks {', '.join(missing)}")
            idx = tuple(item[n] for n in names)
            expr = item["expr"]
        elif isinstance(item, list) and len(item) == arity + 1:
            idx, expr = tuple(item[:arity]), item[arity]
        else:
            raise ChartSpecError("schema", f"{key}[{pos}] is not an entry")
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in idx):
            raise ChartSpecError("schema", f"{key}[{pos}] indices must be integers")
        if not isinstance(expr, (str, int)):
            raise ChartSpecError("schema", f"{key}[{pos}].expr must be a string")
        out.append((idx, str(expr), f"{key}[{pos}]"))
    return out


def _parse(chart: Chart, text: str, where: str):
    try:
        return scalar.parse_expr(text, chart)
    except ParseError as exc:
        raise ChartSpecError("parse", f"{where}: {exc}") from exc


def _pairs(chart, doc, key):
    comps = {}
    n = chart.dim
    for (i, j), text, where in _entries(doc, key, 2):
        if not (1 <= i <= n and 1 <= j <= n):
            raise ChartSpecError("index-range", f"{where}: index out of range 1..{n}")
        if i >= j:
            raise ChartSpecError("index-order", f"{where}: entries need i < j")
        if (i - 1, j - 1) in comps:
            raise ChartSpecError("schema", f"{where}: duplicate entry")
        comps[(i - 1, j - 1)] = _parse(chart, text, where)
    return comps


def from_dict(doc: dict, check: bool = True, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0) -> ChartBundle:
    """Build a bundle from a decoded document; ``check`` runs the load-time invariants."""
    if not isinstance(doc, dict):
        raise ChartSpecError("schema", "document must be a JSON object")
    coords = doc.get("coords")
    dim = doc.get("dim", len(coords) if isinstance(coords, list) else None)
    if not isinstance(dim, int) or dim < 1:
        raise ChartSpecError("schema", "'dim' must be a positive integer")
    if coords is None:
        coords = [f"x{i + 1}" for i in range(dim)]
    if not isinstance(coords, list) or len(coords) != dim or not all(isinstance(c, str) for c in coords):
        raise ChartSpecError("schema", "'coords' must list one name per dimension")
    try:
        chart = Chart(tuple(coords))
    except ValueError as exc:
        raise ChartSpecError("schema", str(exc)) from exc
    n = dim

    W = MultiVector(chart, 2, _pairs(chart, doc, "poisson")) if n >= 2 else MultiVector.zero(chart, 2)

    vol_doc = doc.get("volume", {"expr": "1"})
    if not isinstance(vol_doc, dict) or "expr" not in vol_doc:
        raise ChartSpecError("schema", "'volume' must be an object with 'expr'")
    m = _parse(chart, str(vol_doc["expr"]), "volume")

    sym_doc = doc.get("symplectic")
    source = None
    omega = None
    if sym_doc is not None:
        if not isinstance(sym_doc, dict):
            raise ChartSpecError("schema", "'symplectic' must be an object")
        if sym_doc.get("source") == "invert-poisson":
            source = "invert-poisson"
        elif "omega" in sym_doc:
            source = "omega"
            omega = Form(chart, 2, _pairs(chart, sym_doc, "omega"))
        else:
            raise ChartSpecError("schema", "'symplectic' needs source 'invert-poisson' or 'omega' entries")

    gamma = None
    if "connection" in doc:
        gamma = {}
        for (i, j, k), text, where in _entries(doc, "connection", 3):
            if not all(1 <= v <= n for v in (i, j, k)):
                raise ChartSpecError("index-range", f"{where}: index out of range 1..{n}")
            if (i - 1, j - 1, k - 1) in gamma:
                raise ChartSpecError("schema", f"{where}: duplicate entry")
            gamma[(i - 1, j - 1, k - 1)] = _parse(chart, text, where)

    # a bare omega block with no bivector: Pi is the inverse of omega
    if omega is not None and not W.coeffs:
        S = _symplectic(lambda: SymplecticStructure.from_omega(omega, check, trials, seed))
        W = S.pi.W
    pi = PoissonBivector(W, False)
    if check:
        _require(jacobi_check(W, trials, seed), "jacobi", "[Pi, Pi]_S does not vanish")
        _require(not scalar.is_identically_zero(m, trials, seed), "volume-nonzero", "volume coefficient is identically zero")
        pi = PoissonBivector(W, True)
    volume = VolumeForm.from_coefficient(chart, m, check=False)

    sym = None
    if source == "invert-poisson":
        sym = _symplectic(lambda: SymplecticStructure.from_pi(pi, check, trials, seed))
    elif source == "omega":
        sym = _symplectic(lambda: SymplecticStructure.from_omega(omega, check, trials, seed))
        if check:
            from .tensor import tensors_agree

            _require(tensors_agree(sym.pi.W, W, trials, seed), "symplectic-consistency", "omega is not the inverse of Pi")
        # keep the declared bivector so every module sees the same Pi
        sym = SymplecticStructure(sym.omega, pi, sym.liouville)

    conn = ContravariantConnection.from_entries(pi, gamma) if gamma is not None else None
    known = {"dim", "coords", "poisson", "volume", "symplectic", "connection", "name"}
    extra = {k: v for k, v in doc.items() if k not in known}
    return ChartBundle(chart, pi, volume, conn, sym, source, doc.get("name"), extra)


def _symplectic(build):
    try:
        return build()
    except SymplecticError as exc:
        raise ChartSpecError(exc.check, str(exc)) from exc


def _require(ok: bool, check: str, message: str) -> None:
    if not ok:
        raise ChartSpecError(check, message)


def loads(text: str, check: bool = True, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0) -> ChartBundle:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChartSpecError("json", str(exc)) from exc
    return from_dict(doc, check, trials, seed)


def load(path, check: bool = True, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0) -> ChartBundle:
    """Read and validate a chart-spec file; OSError propagates for I/O problems."""
    text = Path(path).read_text(encoding="utf-8")
    return loads(text, check, trials, seed)


# ---------------------------------------------------------------- writing


def _pair_entries(T) -> list[dict]:
    return [
        {"i": I[0] + 1, "j": I[1] + 1, "expr": scalar.to_text(c, T.chart)}
        for I, c in sorted(T.coeffs.items())
    ]


def to_dict(bundle: ChartBundle) -> dict[str, Any]:
    chart = bundle.chart
    doc: dict[str, Any] = {}
    if bundle.name is not None:
        doc["name"] = bundle.name
    doc["dim"] = chart.dim
    doc["coords"] = list(chart.coord_names)
    doc["poisson"] = _pair_entries(bundle.pi.W)
    doc["volume"] = {"expr": scalar.to_text(bundle.volume.coefficient, chart)}
    if bundle.symplectic is not None:
        if bundle.symplectic_source == "omega":
            doc["symplectic"] = {"omega": _pair_entries(bundle.symplectic.omega)}
        else:
            doc["symplectic"] = {"source": "invert-poisson"}
    if bundle.connection is not None:
        doc["connection"] = [
            {"i": i + 1, "j": j + 1, "k": k + 1, "expr": scalar.to_text(e, chart)}
            for (i, j, k), e in sorted(bundle.connection.entries().items())
        ]
    doc.update(bundle.extra)
    return doc


def dumps(bundle: ChartBundle) -> str:
    return json.dumps(to_dict(bundle), indent=2, ensure_ascii=False) + "\n"


def save(bundle: ChartBundle, path) -> None:
    Path(path).write_text(dumps(bundle), encoding="utf-8")


# ---------------------------------------------------------------- validation report


def run_checks(
    bundle: ChartBundle, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0
) -> list[tuple[str, bool]]:
    """Every invariant the bundle should satisfy, as (name, passed) in a fixed order."""
    out = [
        ("jacobi", jacobi_check(bundle.pi.W, trials, seed)),
        ("volume-nonzero", not scalar.is_identically_zero(bundle.volume.coefficient, trials, seed)),
    ]
    if bundle.symplectic is not None:
        S = bundle.symplectic
        from .tensor import exterior_derivative, is_zero, tensors_agree
        from .poisson import pi_k

        out.append(("nondegenerate", not scalar.is_identically_zero(scalar.det(S.matrix()), trials, seed)))
        out.append(("closed", is_zero(exterior_derivative(S.omega), trials, seed)))
        out.append(("liouville-normalization", scalar.equal_probabilistic(
            pi_k(S.pi, S.liouville.mu, S.liouville.mu), ONE, trials, seed)))
    if bundle.connection is not None:
        out.append(("poisson-connection", is_poisson_connection(bundle.connection, trials, seed)))
        out.append(("torsion-free", is_torsion_free(bundle.connection, trials, seed)))
    return out
