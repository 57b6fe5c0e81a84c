"""Seeded random expressions and tensors for identity testing."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from . import scalar
from .scalar import ONE, ZERO, Chart, Expr
from .tensor import Form, MultiVector


@dataclass(frozen=True)
class GenConfig:
    """Shape of random polynomials: total degree, term count, coefficient size."""

    max_degree: int = 3
    max_terms: int = 3
    coeff_range: int = 5
    density: float = 0.7  # chance that a tensor component is nonzero

    def __post_init__(self):
        if self.max_degree < 0:
            raise ValueError("max_degree must be >= 0")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


def _coefficient(rng: random.Random, cfg: GenConfig) -> Fraction:
    while True:
        c = rng.randint(-cfg.coeff_range, cfg.coeff_range)
        if c:
            break
    if rng.random() < 0.2:
        return Fraction(c, rng.randint(2, 4))
    return Fraction(c)


def monomial(chart: Chart, exponents) -> Expr:
    out = ONE
    for i, k in enumerate(exponents):
        if k:
            out = out * scalar.power(chart.coord(i), k)
    return out


def polynomial(rng: random.Random, chart: Chart, cfg: GenConfig = GenConfig(), nonzero: bool = False) -> Expr:
    """A sparse random polynomial of total degree at most ``cfg.max_degree``."""
    n = chart.dim
    while True:
        terms = []
        for _ in range(rng.randint(1, cfg.max_terms)):
            deg = rng.randint(0, cfg.max_degree)
            exps = [0] * n
            for _ in range(deg):
                exps[rng.randrange(n)] += 1
            terms.append(scalar.const(_coefficient(rng, cfg)) * monomial(chart, exps))
        p = scalar.total(terms)
        if not nonzero or not scalar.is_identically_zero(p, 2, rng.randrange(1 << 30)):
            return p


def positive(rng: random.Random, chart: Chart, cfg: GenConfig = GenConfig()) -> Expr:
    """c + p^2 with c > 0: never zero at real points."""
    low = GenConfig(max_degree=max(cfg.max_degree // 2, 1), max_terms=2, coeff_range=cfg.coeff_range)
    return scalar.const(rng.randint(1, 4)) + scalar.power(polynomial(rng, chart, low), 2)


def nonvanishing_rational(rng: random.Random, chart: Chart, cfg: GenConfig = GenConfig()) -> Expr:
    """A nowhere-vanishing rational function (c + p^2) / (d + q^2), possibly negated."""
    f = positive(rng, chart, cfg)
    if rng.random() < 0.5:
        f = f / positive(rng, chart, cfg)
    return -f if rng.random() < 0.3 else f


def _components(rng, chart, grade, cfg, nonzero):
    keys = list(combinations(range(chart.dim), grade))
    while True:
        comps = {I: polynomial(rng, chart, cfg) for I in keys if rng.random() < cfg.density}
        comps = {I: c for I, c in comps.items() if c is not ZERO}
        if comps or not nonzero or not keys:
            return comps


def multivector(rng: random.Random, chart: Chart, grade: int, cfg: GenConfig = GenConfig(), nonzero: bool = True) -> MultiVector:
    return MultiVector(chart, grade, _components(rng, chart, grade, cfg, nonzero))


def form(rng: random.Random, chart: Chart, grade: int, cfg: GenConfig = GenConfig(), nonzero: bool = True) -> Form:
    return Form(chart, grade, _components(rng, chart, grade, cfg, nonzero))


def poisson_r3(rng: random.Random, chart: Chart, cfg: GenConfig = GenConfig()) -> MultiVector:
    """psi * (C_z e_xy + C_x e_yz + C_y e_zx) for random C, psi; always Poisson."""
    if chart.dim != 3:
        raise ValueError("poisson_r3 needs a 3-chart")
    low = GenConfig(max_degree=min(cfg.max_degree, 2), max_terms=2, coeff_range=cfg.coeff_range)
    C = polynomial(rng, chart, cfg, nonzero=True)
    psi = polynomial(rng, chart, low, nonzero=True)
    f, g, h = (psi * scalar.partial(C, i) for i in (2, 0, 1))
    # e_zx = -e_xz
    return MultiVector(chart, 2, {(0, 1): f, (1, 2): g, (0, 2): -h})
