"""Exact secure d.o.f. region of the alternating-CSIT MISO broadcast channel.

The region is a 2-D polygon given by half-planes ``a*d1 + b*d2 <= c`` with rational
coefficients; vertices are found by pairwise intersection (at most nine constraints).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .errors import OutOfRange, UnsupportedState
from .states import DD, DN, NN, PD, PN, PP, CsitState, StatePmf, as_state, marginals, validate_pmf

Point = tuple[Fraction, Fraction]


@dataclass(frozen=True)
class HalfPlane:
    a: Fraction
    b: Fraction
    c: Fraction
    label: str = ""

    def holds(self, p: Point) -> bool:
        return self.a * p[0] + self.b * p[1] <= self.c

    def to_json(self) -> dict:
        return {"a": str(self.a), "b": str(self.b), "c": str(self.c), "label": self.label}


def _hp(a, b, c, label: str) -> HalfPlane:
    return HalfPlane(Fraction(a), Fraction(b), Fraction(c), label)


NONNEG = (_hp(-1, 0, 0, "d1>=0"), _hp(0, -1, 0, "d2>=0"))


@dataclass(frozen=True)
class RegionSpec:
    halfplanes: tuple[HalfPlane, ...]

    def contains(self, p: Point) -> bool:
        return all(h.holds(p) for h in self.halfplanes)

    def mirror(self) -> "RegionSpec":
        return RegionSpec(tuple(HalfPlane(h.b, h.a, h.c, h.label) for h in self.halfplanes))


@dataclass(frozen=True)
class Polygon:
    vertices: tuple[Point, ...]  # counter-clockwise, starting at the origin

    def __contains__(self, p: Point) -> bool:
        return p in self.vertices


@dataclass(frozen=True)
class Bounds:
    """Right-hand sides of the region constraints for one pmf."""

    trig: Fraction  # (2 + 2 lp - lpp) / 3
    nn: Fraction  # 1 - lnn
    weighted: Fraction  # 2 + 2 lp, for 3 d1 + d2 and d1 + 3 d2
    total: Fraction  # 2 (lp + ld), for d1 + d2

    @property
    def single(self) -> Fraction:
        return min(self.trig, self.nn)


def bounds(p: StatePmf) -> Bounds:
    m = marginals(p)
    return Bounds(
        (2 + 2 * m.lambda_p - p[PP]) / 3,
        1 - p[NN],
        2 + 2 * m.lambda_p,
        2 * (m.lambda_p + m.lambda_d),
    )


def region_inequalities(p: StatePmf) -> RegionSpec:
    """Seven region half-planes plus nonnegativity."""
    b = bounds(p)
    return RegionSpec(
        (
            _hp(1, 0, b.trig, "d1<=(2+2lp-lpp)/3"),
            _hp(1, 0, b.nn, "d1<=1-lnn"),
            _hp(0, 1, b.trig, "d2<=(2+2lp-lpp)/3"),
            _hp(0, 1, b.nn, "d2<=1-lnn"),
            _hp(3, 1, b.weighted, "3d1+d2<=2+2lp"),
            _hp(1, 3, b.weighted, "d1+3d2<=2+2lp"),
            _hp(1, 1, b.total, "d1+d2<=2(lp+ld)"),
        )
        + NONNEG
    )


def _intersect(h: HalfPlane, g: HalfPlane) -> Point | None:
    det = h.a * g.b - h.b * g.a
    if det == 0:
        return None
    return ((h.c * g.b - h.b * g.c) / det, (h.a * g.c - h.c * g.a) / det)


def vertices_of(spec: RegionSpec) -> Polygon:
    """Exact vertex enumeration of a bounded 2-D half-plane intersection."""
    # parallel constraints with equal normals: only the tightest can support a vertex
    tight: dict[tuple[Fraction, Fraction], HalfPlane] = {}
    for h in spec.halfplanes:
        if (h.a, h.b) not in tight or h.c < tight[(h.a, h.b)].c:
            tight[(h.a, h.b)] = h
    spec = RegionSpec(tuple(tight.values()))
    pts = set()
    for h, g in combinations(spec.halfplanes, 2):
        p = _intersect(h, g)
        if p is not None and spec.contains(p):
            pts.add(p)
    if len(pts) <= 2:
        return Polygon(tuple(sorted(pts)))
    cx = sum(float(p[0]) for p in pts) / len(pts)
    cy = sum(float(p[1]) for p in pts) / len(pts)
    ordered = sorted(pts, key=lambda p: math.atan2(float(p[1]) - cy, float(p[0]) - cx))
    # rotate so the lexicographically smallest vertex (the origin) leads
    k = ordered.index(min(ordered))
    return Polygon(tuple(ordered[k:] + ordered[:k]))


def region_vertices(p: StatePmf) -> Polygon:
    return vertices_of(region_inequalities(p))


def membership(p: StatePmf, point: Sequence) -> bool:
    return region_inequalities(p).contains((Fraction(point[0]), Fraction(point[1])))


def sum_sdof_min_form(p: StatePmf) -> Fraction:
    """Maximum of ``d1 + d2`` written as the minimum of four bounds."""
    m = marginals(p)
    b = bounds(p)
    return min(2 * b.trig, 2 * b.nn, b.total, (1 + m.lambda_p))


def sum_sdof(p: StatePmf) -> Fraction:
    """Maximum secure sum d.o.f. ``2 lp + ld + min(ld, ln)``."""
    m = marginals(p)
    value = 2 * m.lambda_p + m.lambda_d + min(m.lambda_d, m.lambda_n)
    assert value == sum_sdof_min_form(p)
    return value


def min_csit(s) -> tuple[Fraction, Fraction]:
    """Least ``(lp, ld)`` reaching sum secure d.o.f. ``s``."""
    s = Fraction(s)
    if not 0 <= s <= 2:
        raise OutOfRange(f"s={s} outside [0, 2]")
    if s >= 1:
        return (s - 1, 1 - s / 2)
    return (Fraction(0), s / 2)


def sum_dof_no_secrecy(p: StatePmf) -> Fraction:
    m = marginals(p)
    return 2 - 2 * m.lambda_n / 3 - max(m.lambda_n, 2 * m.lambda_d) / 3


def _cost_piecewise(ld: Fraction, ln: Fraction) -> Fraction:
    if ln >= 2 * ld:
        return ln
    if ln >= ld:
        return Fraction(2, 3) * (2 * ln - ld)
    return (ln + ld) / 3


def cost_shape(alpha) -> Fraction:
    """Normalized loss ``g(alpha)`` with ``alpha = ld / (ld + ln)``."""
    a = Fraction(alpha)
    if not 0 <= a <= 1:
        raise OutOfRange(f"alpha={a} outside [0, 1]")
    if a <= Fraction(1, 3):
        return 1 - a
    if a <= Fraction(1, 2):
        return Fraction(4, 3) - 2 * a
    return Fraction(1, 3)


def security_cost_alpha(p: StatePmf) -> Fraction:
    m = marginals(p)
    mass = m.lambda_d + m.lambda_n
    if mass == 0:
        return Fraction(0)
    return mass * cost_shape(m.lambda_d / mass)


def security_cost(p: StatePmf) -> Fraction:
    """Sum d.o.f. lost to the secrecy constraints."""
    m = marginals(p)
    value = _cost_piecewise(m.lambda_d, m.lambda_n)
    assert value == sum_dof_no_secrecy(p) - sum_sdof(p)
    return value


def fixed_state_region(state: "CsitState | str") -> RegionSpec:
    """Region when a single state is held all the time (canonical orientations only)."""
    state = as_state(state)
    if state == PP:
        hs = (_hp(1, 0, 1, "d1<=1"), _hp(0, 1, 1, "d2<=1"))
    elif state in (PD, PN):
        hs = (_hp(1, 1, 1, "d1+d2<=1"),)
    elif state == DD:
        return region_inequalities(validate_pmf({DD: 1}))
    elif state == DN:
        hs = (_hp(1, 1, Fraction(1, 2), "d1+d2<=1/2"),)
    elif state == NN:
        hs = (_hp(1, 0, 0, "d1<=0"), _hp(0, 1, 0, "d2<=0"))
    else:
        raise UnsupportedState(f"{state.code} is not a canonical orientation")
    return RegionSpec(hs + NONNEG)


def fixed_state_sum(state: "CsitState | str") -> Fraction:
    """Best sum secure d.o.f. when ``state`` is held alone (mirrored states allowed)."""
    state = as_state(state)
    canonical = state if state.code in ("PP", "PD", "PN", "DD", "DN", "NN") else state.swap()
    return max(x + y for x, y in vertices_of(fixed_state_region(canonical)).vertices)
