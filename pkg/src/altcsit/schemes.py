"""Constituent secure transmission schemes as linear block plans.

Each plan lists, per slot, the 2x1 transmit vector as formal linear combinations of
message symbols ``u`` (user 1), ``v`` (user 2) and artificial-noise symbols ``q``.
Reconstructed receiver observations (keys and retransmitted combinations) are expanded
into these coordinates when the plan is built. Slots and users are 1-based throughout.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

from .algebra import Factor, LinForm, Poly, entry, gain, swap_factor
from .channel import ChannelBlock, apply_channel, complex_gaussian, orthogonal_beam, power_scale
from .errors import CsitViolation, InvalidParameter, LengthMismatch, NotDecodable
from .states import DD, DN, DP, NN, ND, NP, PD, PN, PP, CsitForm, CsitState

RANK_TOL = 1e-8

SCHEME_NAMES = (
    "S2", "S1_32", "S2_32", "S1_43", "S2_43", "S1_1", "S2_1", "S3_1",
    "S1_23", "S2_23", "S3_23", "ZF_10", "ZF_01", "PD_10", "PD_01", "DN_half_0", "DN_0_half",
)


@dataclass(frozen=True, order=True)
class SchemeId:
    """Scheme name; ``S3_1`` carries its block parameter ``n`` (``None`` = the n -> infinity limit)."""

    name: str
    n: Optional[int] = None

    def __post_init__(self) -> None:
        if self.name not in SCHEME_NAMES:
            raise InvalidParameter(f"unknown scheme {self.name!r}")
        if self.name != "S3_1" and self.n is not None:
            raise InvalidParameter(f"{self.name} takes no parameter")
        if self.n is not None and self.n < 1:
            raise InvalidParameter("S3_1 needs n >= 1")

    @classmethod
    def parse(cls, text: str) -> "SchemeId":
        m = re.fullmatch(r"\s*(\w+?)(?:\s*(?:\(\s*n\s*=\s*|:|\[)\s*(-?\d+)\s*[\)\]]?)?\s*", text)
        if not m:
            raise InvalidParameter(f"cannot parse scheme id {text!r}")
        n = int(m.group(2)) if m.group(2) is not None else None
        return cls(m.group(1), n)

    def __str__(self) -> str:
        return self.name if self.n is None else f"{self.name}(n={self.n})"


StateFractions = tuple[tuple[CsitState, Fraction], ...]
Pair = tuple[Fraction, Fraction]


@dataclass(frozen=True)
class CatalogEntry:
    id: SchemeId
    fractions: StateFractions
    pair: Pair

    def mirror(self) -> "CatalogEntry":
        return _mirror_entry(self)


@lru_cache(maxsize=None)
def _mirror_entry(entry: CatalogEntry) -> CatalogEntry:
    return CatalogEntry(entry.id, _merge((s.swap(), f) for s, f in entry.fractions), (entry.pair[1], entry.pair[0]))


def _merge(items: Iterable[tuple[CsitState, Fraction]]) -> StateFractions:
    out: dict[CsitState, Fraction] = {}
    for s, f in items:
        out[s] = out.get(s, Fraction(0)) + f
    return tuple(sorted(out.items(), key=lambda kv: kv[0].code))


def _f(*pairs) -> StateFractions:
    return _merge((s, Fraction(x)) for s, x in pairs)


H, T, Q3, Q4 = Fraction(1, 2), Fraction(1, 3), Fraction(2, 3), Fraction(1, 4)
_CATALOG: dict[str, tuple[StateFractions, Pair]] = {
    "S2": (_f((PP, 1)), (Fraction(1), Fraction(1))),
    "S1_32": (_f((PD, H), (DP, H)), (Fraction(3, 4), Fraction(3, 4))),
    "S2_32": (_f((PD, Q4), (DP, Q4), (PN, Q4), (NP, Q4)), (Fraction(3, 4), Fraction(3, 4))),
    "S1_43": (_f((PD, T), (DP, T), (NN, T)), (Q3, Q3)),
    "S2_43": (_f((PN, T), (NP, T), (DD, T)), (Q3, Q3)),
    "S1_1": (_f((DD, 1)), (H, H)),
    "S2_1": (_f((DD, H), (NN, H)), (H, H)),
    "S3_1": (_f((DN, H), (ND, H)), (H, H)),
    "S1_23": (_f((DD, 1)), (Q3, Fraction(0))),
    "S2_23": (_f((DD, Q3), (NN, T)), (Q3, Fraction(0))),
    "S3_23": (_f((DN, T), (ND, T), (NN, T)), (Q3, Fraction(0))),
    "ZF_10": (_f((PN, H), (NP, H)), (Fraction(1), Fraction(0))),
    "ZF_01": (_f((PN, H), (NP, H)), (Fraction(0), Fraction(1))),
    "PD_10": (_f((PD, 1)), (Fraction(1), Fraction(0))),
    "PD_01": (_f((PD, 1)), (Fraction(0), Fraction(1))),
    "DN_half_0": (_f((DN, 1)), (H, Fraction(0))),
    "DN_0_half": (_f((DN, 1)), (Fraction(0), H)),
}


def catalog() -> list[CatalogEntry]:
    """All constituent schemes with their state fractions and secure d.o.f. pairs.

    ``S3_1`` appears once, with its limiting pair; finite-``n`` values come from :func:`catalog_entry`.
    """
    return [CatalogEntry(SchemeId(name), *_CATALOG[name]) for name in SCHEME_NAMES]


@lru_cache(maxsize=None)
def catalog_entry(sid: SchemeId) -> CatalogEntry:
    if sid.name == "S3_1" and sid.n is not None:
        n = sid.n
        nb = 4 * n + 1
        d = Fraction(2 * n, nb)
        return CatalogEntry(sid, _f((DN, Fraction(2 * n + 1, nb)), (ND, Fraction(2 * n, nb))), (d, d))
    return CatalogEntry(sid, *_CATALOG[sid.name])


# ---------------------------------------------------------------------------
# plans


@dataclass(frozen=True)
class SlotRule:
    """``X(t) = [a1, a2]^T + sum_j form_j * H_j(t)^perp``."""

    antennas: tuple[LinForm, LinForm]
    beams: tuple[tuple[int, LinForm], ...] = ()

    def refs(self, slot: int) -> set[tuple[int, int]]:
        out = self.antennas[0].refs() | self.antennas[1].refs()
        for j, form in self.beams:
            out |= form.refs() | {(j, slot)}
        return out

    def forms(self) -> list[LinForm]:
        return [self.antennas[0], self.antennas[1]] + [f for _, f in self.beams]


@dataclass(frozen=True)
class Violation:
    slot: int
    user: int
    ref_slot: int


@dataclass(frozen=True)
class SchemePlan:
    id: SchemeId
    states: tuple[CsitState, ...]
    rules: tuple[SlotRule, ...]
    n1: int
    n2: int
    n_q: int
    # (slot, user, referenced slot) for delayed feedback that does not report the current slot
    deferred: tuple[tuple[int, int, int], ...] = ()
    mirrored: bool = False

    @property
    def n_B(self) -> int:
        return len(self.states)

    @property
    def pair(self) -> Pair:
        return (Fraction(self.n1, self.n_B), Fraction(self.n2, self.n_B))

    @property
    def state_fractions(self) -> StateFractions:
        return _merge((s, Fraction(1, self.n_B)) for s in self.states)

    @property
    def columns(self) -> dict[tuple[str, int], int]:
        cols: dict[tuple[str, int], int] = {}
        for kind, count in (("u", self.n1), ("v", self.n2), ("q", self.n_q)):
            for i in range(1, count + 1):
                cols[(kind, i)] = len(cols)
        return cols

    @property
    def width(self) -> int:
        return self.n1 + self.n2 + self.n_q

    def feedback_ref(self, slot: int, user: int) -> int:
        for s, u, ref in self.deferred:
            if s == slot and u == user:
                return ref
        return slot

    @property
    def ledger(self) -> tuple[frozenset[tuple[int, int]], ...]:
        """Channel rows ``(user, slot')`` the transmitter may use when sending slot ``t`` (index ``t-1``)."""
        out = []
        for t in range(1, self.n_B + 1):
            known: set[tuple[int, int]] = set()
            for s in range(1, t + 1):
                for user in (1, 2):
                    form = self.states[s - 1].form(user)
                    if form is CsitForm.P:
                        known.add((user, s))
                    elif form is CsitForm.D and s < t:
                        known.add((user, self.feedback_ref(s, user)))
            out.append(frozenset(known))
        return tuple(out)

    def with_states(self, states: Sequence[CsitState]) -> "SchemePlan":
        return SchemePlan(self.id, tuple(states), self.rules, self.n1, self.n2, self.n_q, self.deferred, self.mirrored)

    def with_rule(self, slot: int, rule: SlotRule) -> "SchemePlan":
        rules = list(self.rules)
        rules[slot - 1] = rule
        return SchemePlan(self.id, self.states, tuple(rules), self.n1, self.n2, self.n_q, self.deferred, self.mirrored)


def received(plan: SchemePlan, user: int, slot: int) -> LinForm:
    """Noiseless output of receiver ``user`` at ``slot`` as a formal combination."""
    return _received(plan.rules[slot - 1], user, slot)


def _received(rule: SlotRule, user: int, slot: int) -> LinForm:
    out = rule.antennas[0] * entry(user, slot, 1) + rule.antennas[1] * entry(user, slot, 2)
    for j, form in rule.beams:
        out = out + form * gain(user, slot, j)
    return out


class _Builder:
    def __init__(self, sid: SchemeId, states: Sequence[CsitState], n1: int, n2: int, n_q: int):
        self.sid, self.states = sid, tuple(states)
        self.n1, self.n2, self.n_q = n1, n2, n_q
        self.rules: list[SlotRule] = []
        self.deferred: list[tuple[int, int, int]] = []

    @staticmethod
    def u(i: int) -> LinForm:
        return LinForm.symbol("u", i)

    @staticmethod
    def v(i: int) -> LinForm:
        return LinForm.symbol("v", i)

    @staticmethod
    def q(i: int) -> LinForm:
        return LinForm.symbol("q", i)

    def send(self, a1: LinForm | None = None, a2: LinForm | None = None, beams: Sequence[tuple[int, LinForm]] = ()) -> int:
        self.rules.append(SlotRule((a1 or LinForm(), a2 or LinForm()), tuple(beams)))
        return len(self.rules)

    def rx(self, user: int, slot: int) -> LinForm:
        return _received(self.rules[slot - 1], user, slot)

    def antenna_part(self, user: int, slot: int) -> LinForm:
        """What ``user`` receives at ``slot`` from the antenna-mapped part only (beams excluded)."""
        a1, a2 = self.rules[slot - 1].antennas
        return a1 * entry(user, slot, 1) + a2 * entry(user, slot, 2)

    def done(self) -> SchemePlan:
        assert len(self.rules) == len(self.states)
        return SchemePlan(self.sid, self.states, tuple(self.rules), self.n1, self.n2, self.n_q, tuple(self.deferred))


def _h(user: int, slot: int, k: int) -> Poly:
    return entry(user, slot, k)


def _plan_s2(sid: SchemeId) -> SchemePlan:
    b = _Builder(sid, [PP], 1, 1, 0)
    b.send(beams=[(2, b.u(1)), (1, b.v(1))])
    return b.done()


def _plan_three_halves(sid: SchemeId, states: Sequence[CsitState]) -> SchemePlan:
    b = _Builder(sid, states, 3, 3, 1)
    b.send(a1=b.u(1), beams=[(1, b.q(1))])
    key = b.rx(2, 1)
    b.send(a1=b.v(1) + key, a2=b.v(2) + key, beams=[(2, b.u(2))])
    l1 = b.antenna_part(1, 2)
    b.send(a1=l1, beams=[(2, b.u(3))])
    b.send(a1=l1, beams=[(1, b.v(3))])
    return b.done()


def _plan_s1_43(sid: SchemeId) -> SchemePlan:
    b = _Builder(sid, [PD, DP, NN], 2, 2, 1)
    b.send(a1=b.u(1), beams=[(1, b.q(1))])
    key = b.rx(2, 1)
    b.send(a1=b.v(1) + key, a2=b.v(2) + key, beams=[(2, b.u(2))])
    b.send(a1=b.antenna_part(1, 2))
    return b.done()


def _plan_s2_43(sid: SchemeId) -> SchemePlan:
    b = _Builder(sid, [DD, DD, NP, PN, PN, NP], 4, 4, 2)
    u, v = b.u, b.v
    b.send(a1=b.q(1), a2=b.q(2))
    k1, k2 = b.rx(1, 1), b.rx(2, 1)
    first = u(1) + u(2) + k1  # antenna-1 share of user 1's combination
    second = u(3) + u(4)
    b.send(a1=first + v(3) + v(4), a2=v(1) + v(2) + second + k2)
    g1 = (v(3) + v(4)) * _h(1, 2, 1) + (v(1) + v(2) + k2) * _h(1, 2, 2)
    l2 = first * _h(2, 2, 1) + second * _h(2, 2, 2)
    # fresh combinations completing each user's rank; chosen as single symbols
    b.send(a1=g1, beams=[(2, u(1))])
    b.send(a1=l2, beams=[(1, v(1))])
    b.send(a1=g1, beams=[(1, v(3))])
    b.send(a1=l2, beams=[(2, u(3))])
    return b.done()


def _plan_s1_1(sid: SchemeId) -> SchemePlan:
    b = _Builder(sid, [DD, DD, DD, DD], 2, 2, 2)
    b.send(a1=b.q(1), a2=b.q(2))
    k1, k2 = b.rx(1, 1), b.rx(2, 1)
    b.send(a1=b.u(1) + k1, a2=b.u(2) + k1)
    leak_u = b.rx(2, 2)
    b.send(a1=b.v(1) + k2, a2=b.v(2) + k2)
    leak_v = b.rx(1, 3)
    b.send(a1=leak_u + leak_v)
    return b.done()


def _plan_s2_1(sid: SchemeId) -> SchemePlan:
    b = _Builder(sid, [DD, DD, NN, NN], 2, 2, 2)
    u, v = b.u, b.v
    b.send(a1=b.q(1), a2=b.q(2))
    k1, k2 = b.rx(1, 1), b.rx(2, 1)
    b.send(a1=u(1) + v(1) + k1, a2=u(2) + v(2) + k2)
    l2 = (u(1) + k1) * _h(2, 2, 1) + u(2) * _h(2, 2, 2)
    g1 = v(1) * _h(1, 2, 1) + (v(2) + k2) * _h(1, 2, 2)
    b.send(a1=l2)
    b.send(a1=g1)
    return b.done()


def _plan_two_thirds(sid: SchemeId, states: Sequence[CsitState]) -> SchemePlan:
    b = _Builder(sid, states, 2, 0, 2)
    b.send(a1=b.q(1), a2=b.q(2))
    k1 = b.rx(1, 1)
    b.send(a1=b.u(1) + k1, a2=b.u(2) + k1)
    b.send(a1=b.rx(2, 2))
    return b.done()


def _plan_s3_1(sid: SchemeId) -> SchemePlan:
    n = sid.n
    if n is None or n < 1:
        raise InvalidParameter("S3_1 needs n >= 1")
    states = [DN] * n + [ND] * n + [ND] * n + [DN] * (n + 1)
    b = _Builder(sid, states, 2 * n, 2 * n, 2 * n)
    a_, b_, c_, d_ = 0, n, 2 * n, 3 * n  # block offsets
    for i in range(1, n + 1):
        b.send(a1=b.q(2 * i - 1), a2=b.q(2 * i))
    key1 = {i: b.rx(1, a_ + i) for i in range(1, n + 1)}  # K_{2i-1}
    key2 = {i: b.rx(2, a_ + i) for i in range(1, n + 1)}  # K_{2i}
    for i in range(1, n + 1):
        b.send(a1=b.u(2 * i - 1) + key1[i], a2=b.u(2 * i) + key1[i])
        b.deferred.append((b_ + i, 2, a_ + i))
    for i in range(1, n + 1):
        b.send(a1=b.v(2 * i - 1) + key2[i], a2=b.v(2 * i) + key2[i])
        b.deferred.append((c_ + i, 2, b_ + i))
    b.send()
    b.deferred.append((d_ + 1, 1, c_ + 1))
    for j in range(1, n + 1):
        l_even = b.rx(2, b_ + j)
        g_odd = b.rx(1, c_ + j)
        b.send(a1=l_even + g_odd)
        if j < n:
            b.deferred.append((d_ + 1 + j, 1, c_ + 1 + j))
    return b.done()


def _plan_zf_10(sid: SchemeId) -> SchemePlan:
    b = _Builder(sid, [PN, NP], 2, 0, 1)
    b.send(a1=b.u(1), beams=[(1, b.q(1))])
    b.send(beams=[(2, b.u(2))])
    return b.done()


def _plan_zf_01(sid: SchemeId) -> SchemePlan:
    b = _Builder(sid, [PN, NP], 0, 2, 1)
    b.send(beams=[(1, b.v(1))])
    b.send(a1=b.v(2), beams=[(2, b.q(1))])
    return b.done()


def _plan_pd_10(sid: SchemeId) -> SchemePlan:
    b = _Builder(sid, [PD], 1, 0, 1)
    b.send(a1=b.u(1), beams=[(1, b.q(1))])
    return b.done()


def _plan_pd_01(sid: SchemeId) -> SchemePlan:
    b = _Builder(sid, [PD], 0, 1, 0)
    b.send(beams=[(1, b.v(1))])
    return b.done()


def _plan_dn_half_0(sid: SchemeId) -> SchemePlan:
    b = _Builder(sid, [DN, DN], 1, 0, 2)
    b.send(a1=b.q(1), a2=b.q(2))
    b.send(a1=b.u(1), a2=b.rx(1, 1))
    return b.done()


def _plan_dn_0_half(sid: SchemeId) -> SchemePlan:
    b = _Builder(sid, [DN, DN], 0, 1, 1)
    b.send(a1=b.v(1), a2=b.q(1))
    b.send(a1=b.rx(1, 1))
    return b.done()


_BUILDERS = {
    "S2": _plan_s2,
    "S1_32": lambda sid: _plan_three_halves(sid, [PD, DP, DP, PD]),
    "S2_32": lambda sid: _plan_three_halves(sid, [PD, DP, NP, PN]),
    "S1_43": _plan_s1_43,
    "S2_43": _plan_s2_43,
    "S1_1": _plan_s1_1,
    "S2_1": _plan_s2_1,
    "S3_1": _plan_s3_1,
    "S1_23": lambda sid: _plan_two_thirds(sid, [DD, DD, DD]),
    "S2_23": lambda sid: _plan_two_thirds(sid, [DD, DD, NN]),
    "S3_23": lambda sid: _plan_two_thirds(sid, [DN, ND, NN]),
    "ZF_10": _plan_zf_10,
    "ZF_01": _plan_zf_01,
    "PD_10": _plan_pd_10,
    "PD_01": _plan_pd_01,
    "DN_half_0": _plan_dn_half_0,
    "DN_0_half": _plan_dn_0_half,
}


@lru_cache(maxsize=None)
def build_plan(sid: "SchemeId | str") -> SchemePlan:
    """Slot-by-slot plan of a constituent scheme."""
    if isinstance(sid, str):
        sid = SchemeId.parse(sid)
    if sid.name == "S3_1" and sid.n is None:
        raise InvalidParameter("S3_1 needs an explicit block parameter n >= 1")
    return _BUILDERS[sid.name](sid)


def verification_ids(s3_ns: Iterable[int] = (1, 2, 3, 5)) -> list[SchemeId]:
    """Every buildable scheme id, with ``S3_1`` expanded over ``s3_ns``."""
    out = []
    for name in SCHEME_NAMES:
        if name == "S3_1":
            out.extend(SchemeId(name, n) for n in s3_ns)
        else:
            out.append(SchemeId(name))
    return out


def mirror_plan(plan: SchemePlan) -> SchemePlan:
    """Exchange the roles of the two users (messages, channels, states, feedback)."""
    sym = lambda s: ({"u": "v", "v": "u"}.get(s[0], s[0]), s[1])  # noqa: E731
    m = lambda form: form.map(sym, swap_factor)  # noqa: E731
    rules = tuple(
        SlotRule((m(r.antennas[0]), m(r.antennas[1])), tuple((3 - j, m(f)) for j, f in r.beams)) for r in plan.rules
    )
    return SchemePlan(
        plan.id,
        tuple(s.swap() for s in plan.states),
        rules,
        plan.n2,
        plan.n1,
        plan.n_q,
        tuple((s, 3 - u, ref) for s, u, ref in plan.deferred),
        not plan.mirrored,
    )


def validate_csit(plan: SchemePlan) -> list[Violation]:
    """Channel references that the transmitter cannot know at the slot where they are used."""
    ledger = plan.ledger
    out = set()
    for t, rule in enumerate(plan.rules, start=1):
        for user, ref in rule.refs(t) - ledger[t - 1]:
            out.add(Violation(t, user, ref))
    return sorted(out, key=lambda v: (v.slot, v.user, v.ref_slot))


def plan_to_json(plan: SchemePlan) -> str:
    ledger = plan.ledger
    slots = []
    for t, (state, rule) in enumerate(zip(plan.states, plan.rules), start=1):
        slots.append(
            {
                "slot": t,
                "state": state.code,
                "antenna1": rule.antennas[0].table(),
                "antenna2": rule.antennas[1].table(),
                "beams": [{"null_at_user": j, "coefficients": f.table()} for j, f in rule.beams],
                "ledger": sorted([list(x) for x in ledger[t - 1]]),
            }
        )
    return json.dumps(
        {"scheme": str(plan.id), "mirrored": plan.mirrored, "n_B": plan.n_B, "n1": plan.n1, "n2": plan.n2, "n_q": plan.n_q, "slots": slots},
        indent=2,
    )


# ---------------------------------------------------------------------------
# numeric evaluation


@dataclass(frozen=True)
class TransferModel:
    """``out_r = M_r (u, v, q)^T + noise`` with columns ``[u | v | q]``."""

    m1: np.ndarray
    m2: np.ndarray
    n1: int
    n2: int
    n_q: int

    def matrix(self, side: int) -> np.ndarray:
        return self.m1 if side == 1 else self.m2

    def group(self, name: str) -> np.ndarray:
        """Column indices of ``"u"``, ``"v"`` or ``"q"``."""
        start = {"u": 0, "v": self.n1, "q": self.n1 + self.n2}[name]
        size = {"u": self.n1, "v": self.n2, "q": self.n_q}[name]
        return np.arange(start, start + size)


def _factor_values(plan: SchemePlan, block: ChannelBlock, factors: Iterable[Factor]) -> dict[Factor, complex]:
    vals: dict[Factor, complex] = {}
    for f in factors:
        kind, user, slot, extra = f
        row = block.row(user, slot)
        if kind == "h":
            vals[f] = complex(row[extra - 1])
        else:
            vals[f] = complex(row @ orthogonal_beam(block.row(extra, slot)))
    return vals


def _check(plan: SchemePlan, block: ChannelBlock) -> None:
    if block.n_slots != plan.n_B:
        raise LengthMismatch(f"block has {block.n_slots} slots, plan needs {plan.n_B}")
    bad = validate_csit(plan)
    if bad:
        raise CsitViolation(bad)


def transfer_model(plan: SchemePlan, block: ChannelBlock) -> TransferModel:
    _check(plan, block)
    cols, width = plan.columns, plan.width
    outs = {(r, t): received(plan, r, t) for r in (1, 2) for t in range(1, plan.n_B + 1)}
    factors = set().union(*(f.factors() for f in outs.values()))
    vals = _factor_values(plan, block, factors)
    mats = []
    for r in (1, 2):
        m = np.zeros((plan.n_B, width), dtype=complex)
        for t in range(1, plan.n_B + 1):
            m[t - 1] = outs[(r, t)].row(cols, width, vals)
        mats.append(m)
    return TransferModel(mats[0], mats[1], plan.n1, plan.n2, plan.n_q)


def transmit_coefficients(plan: SchemePlan, block: ChannelBlock) -> np.ndarray:
    """Array ``C`` of shape ``(n_B, 2, width)`` with ``X(t) = C[t] @ (u, v, q)``."""
    _check(plan, block)
    cols, width = plan.columns, plan.width
    factors = set().union(*(f.factors() for r in plan.rules for f in r.forms()))
    vals = _factor_values(plan, block, factors)
    c = np.zeros((plan.n_B, 2, width), dtype=complex)
    for t, rule in enumerate(plan.rules, start=1):
        c[t - 1, 0] = rule.antennas[0].row(cols, width, vals)
        c[t - 1, 1] = rule.antennas[1].row(cols, width, vals)
        for j, form in rule.beams:
            c[t - 1] += np.outer(orthogonal_beam(block.row(j, t)), form.row(cols, width, vals))
    return c


def matrix_rank(m: np.ndarray, tol: float = RANK_TOL) -> int:
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def decodable(model: TransferModel, user: int) -> bool:
    """Own symbols are recoverable iff they add full rank on top of everything else."""
    m = model.matrix(user)
    own = model.group("u" if user == 1 else "v")
    rest = np.setdiff1d(np.arange(m.shape[1]), own)
    return matrix_rank(m) == len(own) + matrix_rank(m[:, rest])


def _ls_decode(m: np.ndarray, own: np.ndarray, out: np.ndarray) -> np.ndarray:
    if len(own) == 0:
        return np.zeros(0, dtype=complex)
    rest = np.setdiff1d(np.arange(m.shape[1]), own)
    a, b = m[:, own], m[:, rest]
    if b.shape[1]:
        uu, s, _ = np.linalg.svd(b, full_matrices=False)
        basis = uu[:, s > RANK_TOL * (s[0] if s.size else 1.0)]
        proj = np.eye(m.shape[0]) - basis @ basis.conj().T
        a, out = proj @ a, proj @ out
    est, *_ = np.linalg.lstsq(a, out, rcond=None)
    return est


@dataclass(frozen=True)
class BlockResult:
    y: np.ndarray
    z: np.ndarray
    decoded_u: np.ndarray
    decoded_v: np.ndarray
    q: np.ndarray = field(repr=False)
    scale: float = 1.0


def run_block(
    plan: SchemePlan,
    block: ChannelBlock,
    symbols: tuple[np.ndarray, np.ndarray],
    P: float,
    noise_seed: Optional[int] = None,
    q_seed: int = 0,
) -> BlockResult:
    """Transmit one block at power ``P`` and decode both users by projected least squares.

    Artificial noise is CN(0, P); the whole transmit vector is scaled so its expected
    average power equals ``P``. ``noise_seed=None`` runs noiselessly.
    """
    model = transfer_model(plan, block)
    for user in (1, 2):
        if not decodable(model, user):
            raise NotDecodable(f"user {user} cannot decode {plan.id} on this block")
    u, v = (np.asarray(s, dtype=complex).reshape(-1) for s in symbols)
    if u.size != plan.n1 or v.size != plan.n2:
        raise LengthMismatch("symbol counts do not match the plan")
    q = complex_gaussian(plan.n_q, P, q_seed)
    coeffs = transmit_coefficients(plan, block)
    scale = power_scale(coeffs, P)
    sym = np.concatenate([u, v, q])
    x = scale * np.einsum("tkc,c->tk", coeffs, sym)
    y, z = apply_channel(x, block, noise_seed)
    du = _ls_decode(scale * model.m1, model.group("u"), y)
    dv = _ls_decode(scale * model.m2, model.group("v"), z)
    return BlockResult(y, z, du, dv, q, scale)
