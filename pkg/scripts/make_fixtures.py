"""Regenerate the chart-spec fixtures shipped under fixtures/.

Usage: python3 scripts/make_fixtures.py [OUTDIR]
"""

import sys
from itertools import permutations
from pathlib import Path

from contracalc import chartspec
from contracalc.chartspec import ChartBundle
from contracalc.connection import build_2d_canonical, build_darboux_symmetric, build_trivial, darboux_bivector
from contracalc.poisson import PoissonBivector
from contracalc.scalar import Chart
from contracalc.symplectic import SymplecticStructure
from contracalc.tensor import MultiVector
from contracalc.volume import VolumeForm


def _bundle(name, pi, *, connection=None, symplectic=False, volume=None):
    sym = SymplecticStructure.from_pi(pi) if symplectic else None
    vol = volume or VolumeForm.standard(pi.chart)
    return ChartBundle(
        pi.chart, pi, vol, connection, sym, "invert-poisson" if symplectic else None, name
    )


def r2_standard():
    ch = Chart(("x", "y"))
    pi = PoissonBivector.from_bivector(MultiVector.basis(ch, 0, 1))
    return _bundle("r2-standard", pi, connection=build_trivial(pi), symplectic=True)


def r2_phi():
    # Pi = (1 + x^2) e_x ^ e_y, so omega = dx ^ dy / (1 + x^2)
    ch = Chart(("x", "y"))
    pi = PoissonBivector.from_bivector(MultiVector(ch, 2, {(0, 1): ch.parse("1 + x^2")}))
    return _bundle("r2-phi", pi, connection=build_2d_canonical(pi), symplectic=True)


def r3_fgh():
    # f e_xy + g e_yz + h e_zx with f = z, g = x, h = y
    ch = Chart(("x", "y", "z"))
    z, x, y = ch.parse("z"), ch.parse("x"), ch.parse("y")
    pi = PoissonBivector.from_bivector(MultiVector(ch, 2, {(0, 1): z, (1, 2): x, (0, 2): -y}))
    return _bundle("r3-fgh", pi)


def r4_darboux():
    ch = Chart(("x1", "x2", "y1", "y2"))
    pi = darboux_bivector(ch)
    return _bundle("r4-darboux", pi, connection=build_trivial(pi), symplectic=True)


def r4_darboux_s():
    ch = Chart(("x1", "x2", "y1", "y2"))
    S = {}
    for idx, text in [((0, 0, 0), "x1"), ((0, 1, 2), "y1*x2"), ((1, 2, 3), "x1^2"), ((1, 3, 3), "y2 + 1")]:
        for p in set(permutations(idx)):
            S[p] = ch.parse(text)
    D = build_darboux_symmetric(ch, S)
    return _bundle("r4-darboux-s", D.pi, connection=D, symplectic=True)


BUILDERS = [r2_standard, r2_phi, r3_fgh, r4_darboux, r4_darboux_s]


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    out = Path(argv[0]) if argv else Path(__file__).resolve().parent.parent / "fixtures"
    out.mkdir(parents=True, exist_ok=True)
    for build in BUILDERS:
        bundle = build()
        path = out / f"{bundle.name}.chart.json"
        chartspec.save(bundle, path)
        # round-trip with full validation before declaring victory
        chartspec.load(path)
        print(path)


if __name__ == "__main__":
    main()
