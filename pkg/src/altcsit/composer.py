"""Time-sharing allocations of constituent schemes that reach every region corner exactly.

An allocation runs each scheme for a fraction ``omega`` of the total time; the scheme then
consumes ``omega * fraction`` of each of its states. Two refinements beyond a plain
(scheme, omega) list:

* ``mirrored`` runs the user-swapped scheme (states swapped, pair swapped);
* ``served_by`` lets a slot that needs state ``r`` run in a state ``a`` that dominates it
  (more CSIT for both users), since extra CSIT can simply be ignored.

Named corners follow the case analysis on the marginals: Case A (``ld >= ln``) has
corners P1, P2; Case B has P or Q, S and/or R. ``AXIS`` is the single-user corner
``(max d1, 0)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import PointOutsideRegion, TargetNotApplicable
from .region import Point, bounds, fixed_state_sum, membership, region_vertices, sum_sdof
from .schemes import CatalogEntry, SchemeId, catalog_entry
from .states import ALL_STATES, DD, DN, NN, ND, PD, PN, PP, CsitState, StatePmf, as_state, marginals

ZERO = Fraction(0)


@lru_cache(maxsize=None)
def _oriented_entry(sid: SchemeId, mirrored: bool) -> CatalogEntry:
    e = catalog_entry(sid)
    return e.mirror() if mirrored else e


@dataclass(frozen=True)
class AllocationEntry:
    scheme: SchemeId
    omega: Fraction
    mirrored: bool = False
    served_by: tuple[tuple[CsitState, CsitState], ...] = ()  # (required state, state actually used)

    @property
    def catalog(self) -> CatalogEntry:
        return _oriented_entry(self.scheme, self.mirrored)

    def usage(self) -> dict[CsitState, Fraction]:
        relabel = dict(self.served_by)
        out: dict[CsitState, Fraction] = {}
        for s, frac in self.catalog.fractions:
            t = relabel.get(s, s)
            out[t] = out.get(t, ZERO) + self.omega * frac
        return out

    def mirror(self) -> "AllocationEntry":
        return AllocationEntry(
            self.scheme, self.omega, not self.mirrored, tuple((r.swap(), a.swap()) for r, a in self.served_by)
        )

    def label(self) -> str:
        text = str(self.scheme)
        if self.mirrored:
            text = f"swap({text})"
        if self.served_by:
            text += "[" + ",".join(f"{r.code}->{a.code}" for r, a in self.served_by) + "]"
        return text


@dataclass(frozen=True)
class Allocation:
    entries: tuple[AllocationEntry, ...] = ()
    target: str = ""

    def mirror(self) -> "Allocation":
        return Allocation(tuple(e.mirror() for e in self.entries), self.target)

    def usage(self) -> dict[CsitState, Fraction]:
        out = {s: ZERO for s in ALL_STATES}
        for e in self.entries:
            for s, m in e.usage().items():
                out[s] += m
        return out

    def total_time(self) -> Fraction:
        return sum((e.omega for e in self.entries), ZERO)


def achieved_point(alloc: Allocation) -> Point:
    d1 = d2 = ZERO
    for e in alloc.entries:
        p = e.catalog.pair
        d1 += e.omega * p[0]
        d2 += e.omega * p[1]
    return (d1, d2)


@dataclass(frozen=True)
class BudgetLine:
    state: CsitState
    used: Fraction
    budget: Fraction

    @property
    def slack(self) -> Fraction:
        return self.budget - self.used


def feasible(
    alloc: Allocation,
    budget: "StatePmf | Mapping[CsitState | str, Fraction]",
    allow_idle: bool = False,
) -> tuple[bool, list[BudgetLine]]:
    """Check an allocation against per-state time budgets.

    Corner allocations must use every state's budget exactly except ``NN``. With
    ``allow_idle`` any unused time is accepted (needed for interior points).
    """
    if isinstance(budget, StatePmf):
        mass = {s: budget[s] for s in ALL_STATES}
    else:
        mass = {s: ZERO for s in ALL_STATES}
        for k, v in budget.items():
            mass[as_state(k)] += Fraction(v)
    used = alloc.usage()
    ledger = [BudgetLine(s, used[s], mass[s]) for s in ALL_STATES]
    ok = alloc.total_time() <= 1
    for e in alloc.entries:
        ok &= e.omega >= 0
        needed = {s for s, _ in e.catalog.fractions}
        for r, a in e.served_by:
            ok &= r in needed and a.dominates(r)
    for line in ledger:
        ok &= line.slack >= 0
        if not allow_idle and line.state != NN:
            ok &= line.slack == 0
    return bool(ok), ledger


# ---------------------------------------------------------------------------
# case analysis


@dataclass(frozen=True)
class CaseInfo:
    case: str  # "A" or "B"
    single_user: str  # "trig": (2+2lp-lpp)/3 is the tighter single-user bound; "nn": 1-lnn
    subcase: str  # A1..A3 or B1..B3
    relevance: str  # Case B only: "partial" (lnn < ld), "irrelevant" (lnn > ld), "both" at equality
    targets: tuple[str, ...]


def _masses(p: StatePmf) -> tuple[Fraction, ...]:
    return p[PP], p[PD], p[PN], p[DD], p[DN], p[NN]


def classify(p: StatePmf) -> CaseInfo:
    pp, pd, pn, dd, dn, nn = _masses(p)
    m = marginals(p)
    single = "trig" if dd + 2 * dn >= 2 * nn else "nn"
    if m.lambda_n <= m.lambda_d:
        if pd >= pn and dd >= nn:
            sub = "A1"
        elif pd >= pn:
            sub = "A2"
        else:
            sub = "A3"
        return CaseInfo("A", single, sub, "", ("P1", "P2", "AXIS"))
    if pd <= pn and dd <= nn:
        sub = "B1"
    elif pd >= pn and dd <= nn:
        sub = "B2"
    else:
        sub = "B3"
    if nn < m.lambda_d:
        rel = "partial"
    elif nn > m.lambda_d:
        rel = "irrelevant"
    else:
        rel = "both"
    targets = []
    if dd + 2 * dn >= 2 * nn:
        targets.append("P")
    if dd + 2 * dn <= 2 * nn:
        targets.append("Q")
    if rel != "irrelevant":
        targets.append("S")
    if rel != "partial":
        targets.append("R")
    targets.append("AXIS")
    return CaseInfo("B", single, sub, rel, tuple(targets))


@dataclass(frozen=True)
class CornerTarget:
    """Named corner, optionally user-swapped, or an explicit region vertex."""

    name: str
    mirrored: bool = False
    vertex: Optional[Point] = None

    @classmethod
    def parse(cls, text: str) -> "CornerTarget":
        text = text.strip()
        mirrored = False
        for prefix in ("mirror:", "swap:"):
            if text.lower().startswith(prefix):
                mirrored, text = True, text[len(prefix) :]
        if text.endswith("'"):
            mirrored, text = True, text[:-1]
        if text.lower().startswith("vertex:"):
            a, b = text[len("vertex:") :].split(",")
            return cls("VERTEX", False, (Fraction(a.strip()), Fraction(b.strip())))
        name = text.upper()
        if name not in ("P1", "P2", "P", "Q", "S", "R", "AXIS"):
            raise TargetNotApplicable(f"unknown corner {text!r}")
        return cls(name, mirrored)

    def __str__(self) -> str:
        if self.name == "VERTEX":
            return f"vertex:{self.vertex[0]},{self.vertex[1]}"
        return f"mirror:{self.name}" if self.mirrored else self.name


def corner_point(p: StatePmf, target: CornerTarget) -> Point:
    if target.name == "VERTEX":
        return target.vertex
    b = bounds(p)
    m = marginals(p)
    su = b.single
    name = target.name
    if name == "P1":
        pt = (su, b.weighted - 3 * su)
    elif name == "P2":
        pt = (b.weighted / 4, b.weighted / 4)
    elif name == "P":
        pt = (b.trig, p[PP])
    elif name == "Q":
        pt = (b.nn, min(b.weighted - 3 * b.nn, b.total - b.nn))
    elif name == "S":
        pt = (m.lambda_p + m.lambda_n, m.lambda_p + 2 * m.lambda_d - m.lambda_n)
    elif name == "R":
        pt = (b.nn, b.total - b.nn)
    elif name == "AXIS":
        pt = (su, ZERO)
    else:
        raise TargetNotApplicable(name)
    return (pt[1], pt[0]) if target.mirrored else pt


# ---------------------------------------------------------------------------
# recipes (user-1-favored orientation)


class _Recipe:
    def __init__(self) -> None:
        self.entries: list[AllocationEntry] = []

    def add(self, name: str, omega: Fraction, mirrored: bool = False, served=()) -> None:
        assert omega >= 0, (name, omega)
        if omega:
            self.entries.append(AllocationEntry(SchemeId(name), Fraction(omega), mirrored, tuple(served)))

    def user1_on_pd(self, amount: Fraction) -> None:
        """(1, 0) on ``amount`` of both PD and DP."""
        self.add("PD_10", amount)
        self.add("PD_01", amount, mirrored=True)

    def build(self, target: str) -> Allocation:
        return Allocation(tuple(self.entries), target)


def _two_thirds_tail(r: _Recipe, dd: Fraction, dn: Fraction, nn: Fraction) -> None:
    """(2/3, 0) per unit time on all of DD, DN, ND and NN (needs dd + 2 dn >= 2 nn)."""
    if nn <= dn:
        r.add("S3_23", 3 * nn)
        # DN/ND mass beyond what NN can pair with: the NN slot runs in DN or ND
        r.add("S3_23", dn - nn, served=((NN, DN),))
        r.add("S3_23", dn - nn, served=((NN, ND),))
        r.add("S1_23", dd)
    else:
        r.add("S3_23", 3 * dn)
        r.add("S2_23", 3 * (nn - dn))
        r.add("S1_23", dd - 2 * (nn - dn))


def _recipe_trig(p: StatePmf, axis: bool) -> _Recipe:
    pp, pd, pn, dd, dn, nn = _masses(p)
    r = _Recipe()
    if axis:
        r.add("PD_10", pp, served=((PD, PP),))
    else:
        r.add("S2", pp)
    r.user1_on_pd(pd)
    r.add("ZF_10", 2 * pn)
    _two_thirds_tail(r, dd, dn, nn)
    return r


def _recipe_nn(p: StatePmf) -> _Recipe:
    pp, pd, pn, dd, dn, nn = _masses(p)
    r = _Recipe()
    r.add("S2", pp)
    if nn <= dd + dn:
        r.add("S3_23", 3 * dn)
        r.add("S2_23", 3 * (dd + dn - nn))
        r.add("S2_1", 2 * (2 * nn - 2 * dn - dd))
        r.user1_on_pd(pd)
    else:
        r.add("S3_23", 3 * dn)
        r.add("S2_1", 2 * dd)
        extra = nn - dn - dd
        r.add("S1_43", 3 * extra)
        r.user1_on_pd(pd - extra)
    r.add("ZF_10", 2 * pn)
    return r


def _recipe_axis_nn(p: StatePmf) -> _Recipe:
    pp, pd, pn, dd, dn, nn = _masses(p)
    r = _Recipe()
    r.add("PD_10", pp, served=((PD, PP),))
    r.user1_on_pd(pd)
    r.add("ZF_10", 2 * pn)
    r.add("S3_23", 3 * dn)
    r.add("S2_23", Fraction(3, 2) * dd)
    return r


def _recipe_p2(p: StatePmf, sub: str) -> _Recipe:
    pp, pd, pn, dd, dn, nn = _masses(p)
    r = _Recipe()
    r.add("S2", pp)
    if sub == "A1":
        r.add("S2_32", 4 * pn)
        r.add("S1_32", 2 * (pd - pn))
        r.add("S2_1", 2 * nn)
        r.add("S1_1", dd - nn)
    elif sub == "A2":
        r.add("S2_32", 4 * pn)
        r.add("S2_1", 2 * dd)
        r.add("S1_43", 3 * (nn - dd))
        r.add("S1_32", 2 * (pd - pn - (nn - dd)))
    else:
        r.add("S2_32", 4 * pd)
        r.add("S2_1", 2 * nn)
        r.add("S2_43", 3 * (pn - pd))
        r.add("S1_1", dd - nn - (pn - pd))
    r.add("S3_1", 2 * dn)
    return r


def _recipe_s(p: StatePmf, sub: str) -> _Recipe:
    pp, pd, pn, dd, dn, nn = _masses(p)
    r = _Recipe()
    r.add("S2", pp)
    if sub == "B1":
        r.add("S2_1", 2 * dd)
        if nn - dd <= dn:
            r.add("S3_23", 3 * (nn - dd))
            r.add("S3_1", 2 * (dn - (nn - dd)))
            r.add("S2_32", 4 * pd)
            r.add("ZF_10", 2 * (pn - pd))
        else:
            extra = nn - dd - dn
            r.add("S3_23", 3 * dn)
            r.add("S1_43", 3 * extra)
            r.add("S2_32", 4 * (pd - extra))
            r.add("ZF_10", 2 * (pn - (pd - extra)))
    elif sub == "B2":
        r.add("S2_1", 2 * dd)
        if nn - dd <= pd:
            r.add("S1_43", 3 * (nn - dd))
            rest = pd - (nn - dd)
            r.add("S2_32", 4 * rest)
            r.add("ZF_10", 2 * (pn - rest))
            r.add("S3_1", 2 * dn)
        else:
            extra = nn - dd - pd
            r.add("S1_43", 3 * pd)
            r.add("S3_23", 3 * extra)
            r.add("S3_1", 2 * (dn - extra))
            r.add("ZF_10", 2 * pn)
    else:
        r.add("S2_32", 4 * pd)
        r.add("S2_1", 2 * nn)
        r.add("S2_43", 3 * (dd - nn))
        r.add("ZF_10", 2 * (pn - pd - (dd - nn)))
        r.add("S3_1", 2 * dn)
    return r


def _recipe_r(p: StatePmf) -> _Recipe:
    pp, pd, pn, dd, dn, nn = _masses(p)
    r = _Recipe()
    r.add("S2", pp)
    r.add("S2_1", 2 * dd)
    r.add("S1_43", 3 * pd)
    r.add("S3_23", 3 * dn)
    r.add("ZF_10", 2 * pn)
    return r


def _recipe(p: StatePmf, name: str, info: CaseInfo) -> _Recipe:
    if name not in info.targets:
        raise TargetNotApplicable(f"{name} does not apply to Case {info.case} ({info.subcase})")
    if name == "P2":
        return _recipe_p2(p, info.subcase)
    if name == "S":
        return _recipe_s(p, info.subcase)
    if name == "R" or (name == "Q" and info.relevance == "irrelevant"):
        # beyond lnn > ld the Q formula leaves the region; its clipped value is R
        return _recipe_r(p)
    if name == "AXIS":
        return _recipe_trig(p, axis=True) if info.single_user == "trig" else _recipe_axis_nn(p)
    if name == "P" or (name == "P1" and info.single_user == "trig"):
        return _recipe_trig(p, axis=False)
    return _recipe_nn(p)


def compose_corner(p: StatePmf, target: Union[CornerTarget, str]) -> Allocation:
    """Allocation reaching a named corner (or explicit vertex) exactly."""
    if isinstance(target, str):
        target = CornerTarget.parse(target)
    if target.name == "VERTEX":
        return _compose_vertex(p, target.vertex)
    info = classify(p)
    alloc = _recipe(p, target.name, info).build(str(target))
    if target.mirrored:
        alloc = alloc.mirror()
    assert achieved_point(alloc) == corner_point(p, target), (str(p), str(target))
    return alloc


def applicable_targets(p: StatePmf) -> list[CornerTarget]:
    names = classify(p).targets
    return [CornerTarget(n, m) for m in (False, True) for n in names]


def _compose_vertex(p: StatePmf, v: Point) -> Allocation:
    v = (Fraction(v[0]), Fraction(v[1]))
    if v not in region_vertices(p).vertices:
        raise TargetNotApplicable(f"{v} is not a region vertex")
    if v == (ZERO, ZERO):
        return Allocation((), "vertex:0,0")
    for t in applicable_targets(p):
        if corner_point(p, t) == v:
            alloc = compose_corner(p, t)
            return Allocation(alloc.entries, f"vertex:{v[0]},{v[1]}={t}")
    raise TargetNotApplicable(f"no recipe reaches vertex {v}")


def _merge(parts: Iterable[tuple[Fraction, Allocation]], target: str) -> Allocation:
    acc: dict[tuple, Fraction] = {}
    order: list[tuple] = []
    for w, alloc in parts:
        for e in alloc.entries:
            key = (e.scheme, e.mirrored, e.served_by)
            if key not in acc:
                acc[key] = ZERO
                order.append(key)
            acc[key] += w * e.omega
    entries = tuple(AllocationEntry(k[0], acc[k], k[1], k[2]) for k in order if acc[k])
    return Allocation(entries, target)


def _solve_weights(pts: Sequence[Point], x: Point) -> Optional[list[Fraction]]:
    """Exact convex weights of ``x`` over 1-3 points, or None."""
    if len(pts) == 1:
        return [Fraction(1)] if pts[0] == x else None
    if len(pts) == 2:
        (a1, a2), (b1, b2) = pts
        d1, d2 = b1 - a1, b2 - a2
        if d1 * (x[1] - a2) - d2 * (x[0] - a1) != 0:
            return None
        t = (x[0] - a1) / d1 if d1 else (x[1] - a2) / d2
        return [1 - t, t] if 0 <= t <= 1 else None
    (a1, a2), (b1, b2), (c1, c2) = pts
    det = (b1 - a1) * (c2 - a2) - (c1 - a1) * (b2 - a2)
    if det == 0:
        return None
    s = ((x[0] - a1) * (c2 - a2) - (c1 - a1) * (x[1] - a2)) / det
    t = ((b1 - a1) * (x[1] - a2) - (x[0] - a1) * (b2 - a2)) / det
    w = [1 - s - t, s, t]
    return w if all(k >= 0 for k in w) else None


def compose_point(p: StatePmf, point: Sequence) -> Allocation:
    """Time-share up to three vertex allocations to reach any point of the region."""
    x = (Fraction(point[0]), Fraction(point[1]))
    if not membership(p, x):
        raise PointOutsideRegion(f"{x} is outside the region")
    verts = sorted(region_vertices(p).vertices)
    for k in (1, 2, 3):
        for subset in combinations(verts, k):
            w = _solve_weights(subset, x)
            if w is not None:
                parts = [(wi, compose_corner(p, CornerTarget("VERTEX", vertex=v))) for wi, v in zip(w, subset) if wi]
                return _merge(parts, f"point:{x[0]},{x[1]}")
    raise PointOutsideRegion(f"{x} not covered by vertices")  # pragma: no cover


def synergy_gap(p: StatePmf) -> tuple[Fraction, Fraction]:
    """Joint-coding sum d.o.f. versus time-sharing per-state optima."""
    separable = sum((m * fixed_state_sum(s) for s, m in p.items()), ZERO)
    return sum_sdof(p), separable


def allocation_to_json(alloc: Allocation, p: StatePmf) -> dict:
    ok, ledger = feasible(alloc, p, allow_idle=alloc.target.startswith("point:"))
    d = achieved_point(alloc)
    return {
        "target": alloc.target,
        "entries": [
            {
                "scheme": str(e.scheme),
                "mirrored": e.mirrored,
                "served_by": {r.code: a.code for r, a in e.served_by},
                "omega": str(e.omega),
                "label": e.label(),
            }
            for e in alloc.entries
        ],
        "usage": {
            line.state.code: {"used": str(line.used), "budget": str(line.budget)} for line in ledger if line.budget or line.used
        },
        "achieved": [str(d[0]), str(d[1])],
        "feasible": ok,
    }
