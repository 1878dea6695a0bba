"""CSIT forms, joint CSIT states and the symmetric state pmf.

All masses are exact :class:`fractions.Fraction` values.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

from .errors import AsymmetricPmf, NegativeMass, PmfError, SumNotOne

Number = Union[Fraction, int, str, float]


class CsitForm(enum.Enum):
    """Transmitter knowledge of one user's channel in one slot."""

    P = "P"  # perfect, current slot
    D = "D"  # delayed, usable from a later slot
    N = "N"  # none

    @property
    def rank(self) -> int:
        return {"P": 2, "D": 1, "N": 0}[self.value]

    def __lt__(self, other: "CsitForm") -> bool:
        return self.rank < other.rank

    def __le__(self, other: "CsitForm") -> bool:
        return self.rank <= other.rank


@dataclass(frozen=True)
class CsitState:
    i1: CsitForm
    i2: CsitForm

    @classmethod
    def parse(cls, code: str) -> "CsitState":
        code = code.strip().upper()
        if len(code) != 2 or any(c not in "PDN" for c in code):
            raise PmfError(f"unknown CSIT state {code!r}")
        return cls(CsitForm(code[0]), CsitForm(code[1]))

    @property
    def code(self) -> str:
        return self.i1.value + self.i2.value

    def swap(self) -> "CsitState":
        return CsitState(self.i2, self.i1)

    def form(self, user: int) -> CsitForm:
        return self.i1 if user == 1 else self.i2

    def dominates(self, other: "CsitState") -> bool:
        """True if this state gives at least as much CSIT as ``other`` for both users."""
        return other.i1 <= self.i1 and other.i2 <= self.i2

    def __str__(self) -> str:
        return self.code

    def __repr__(self) -> str:
        return self.code


ALL_STATES: tuple[CsitState, ...] = tuple(
    CsitState(a, b) for a in (CsitForm.P, CsitForm.D, CsitForm.N) for b in (CsitForm.P, CsitForm.D, CsitForm.N)
)

PP, PD, PN, DP, DD, DN, NP, ND, NN = (CsitState.parse(c) for c in ("PP", "PD", "PN", "DP", "DD", "DN", "NP", "ND", "NN"))


def as_state(s: "CsitState | str") -> CsitState:
    return s if isinstance(s, CsitState) else CsitState.parse(s)


def to_fraction(value: Number) -> Fraction:
    """Parse ``"num/den"``, integer or decimal input into an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise PmfError("boolean is not a mass")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # shortest repr keeps 0.1 as 1/10 rather than the binary expansion
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise PmfError(f"cannot parse mass {value!r}") from exc
    raise PmfError(f"unsupported mass type {type(value).__name__}")


@dataclass(frozen=True)
class StatePmf:
    """Validated symmetric pmf over the nine CSIT states."""

    masses: tuple[tuple[CsitState, Fraction], ...]

    def __getitem__(self, state: "CsitState | str") -> Fraction:
        state = as_state(state)
        i = _INDEX.get(state)
        if i is not None and i < len(self.masses) and self.masses[i][0] == state:
            return self.masses[i][1]
        for s, m in self.masses:
            if s == state:
                return m
        return Fraction(0)

    def items(self) -> Iterator[tuple[CsitState, Fraction]]:
        return iter(self.masses)

    def support(self) -> list[CsitState]:
        return [s for s, m in self.masses if m]

    def as_dict(self) -> dict[str, str]:
        return {s.code: str(m) for s, m in self.masses if m}

    def __str__(self) -> str:
        return "{" + ", ".join(f"{k}:{v}" for k, v in self.as_dict().items()) + "}"


_INDEX = {s: i for i, s in enumerate(ALL_STATES)}

SYMMETRIC_PAIRS = ((PD, DP), (DN, ND), (PN, NP))


def validate_pmf(raw: Mapping["CsitState | str", Number]) -> StatePmf:
    """Build a :class:`StatePmf`, rejecting negative, non-normalized or asymmetric input."""
    if len(raw) > 9:
        raise PmfError("at most nine states")
    masses: dict[CsitState, Fraction] = {s: Fraction(0) for s in ALL_STATES}
    for key, value in raw.items():
        state = as_state(key)
        m = to_fraction(value)
        if m < 0:
            raise NegativeMass(f"{state.code} has negative mass {m}")
        masses[state] += m
    total = sum(masses.values(), Fraction(0))
    if total != 1:
        raise SumNotOne(f"masses sum to {total}")
    for a, b in SYMMETRIC_PAIRS:
        if masses[a] != masses[b]:
            raise AsymmetricPmf(f"{a.code}={masses[a]} differs from {b.code}={masses[b]}")
    return StatePmf(tuple((s, masses[s]) for s in ALL_STATES))


def pmf(**kwargs: Number) -> StatePmf:
    """Shorthand: ``pmf(PD="1/2", DP="1/2")``."""
    return validate_pmf(kwargs)


@dataclass(frozen=True)
class Marginals:
    lambda_p: Fraction
    lambda_d: Fraction
    lambda_n: Fraction


def marginals(p: StatePmf) -> Marginals:
    """Total fraction of time each CSIT form is held for one user."""
    lp = p[PP] + p[PD] + p[PN]
    ld = p[PD] + p[DD] + p[DN]
    ln = p[PN] + p[DN] + p[NN]
    assert lp + ld + ln == 1
    return Marginals(lp, ld, ln)


class EnhancementRule(str, enum.Enum):
    N_to_D = "N_to_D"
    D_to_P = "D_to_P"
    all_imperfect_to_DD = "all_imperfect_to_DD"
    all_P_states_to_PP_rest_DD = "all_P_states_to_PP_rest_DD"
    non_NN_to_PP = "non_NN_to_PP"


def _map_state(state: CsitState, rule: EnhancementRule) -> CsitState:
    P, D, N = CsitForm.P, CsitForm.D, CsitForm.N
    if rule is EnhancementRule.N_to_D:
        up = {N: D}
        return CsitState(up.get(state.i1, state.i1), up.get(state.i2, state.i2))
    if rule is EnhancementRule.D_to_P:
        up = {D: P}
        return CsitState(up.get(state.i1, state.i1), up.get(state.i2, state.i2))
    has_p = P in (state.i1, state.i2)
    if rule is EnhancementRule.all_imperfect_to_DD:
        return state if has_p else DD
    if rule is EnhancementRule.all_P_states_to_PP_rest_DD:
        return PP if has_p else DD
    if rule is EnhancementRule.non_NN_to_PP:
        return state if state == NN else PP
    raise ValueError(rule)


def enhance(p: StatePmf, rule: "EnhancementRule | str") -> StatePmf:
    """Substitute each state by a (weakly) more informed one and merge masses."""
    rule = EnhancementRule(rule)
    out: dict[CsitState, Fraction] = {}
    for s, m in p.items():
        t = _map_state(s, rule)
        out[t] = out.get(t, Fraction(0)) + m
    return validate_pmf(out)


def symmetric_pmf(pp: Number = 0, pd: Number = 0, pn: Number = 0, dd: Number = 0, dn: Number = 0, nn: Number = 0) -> StatePmf:
    """Build a pmf from the six free masses (each off-diagonal value is used twice)."""
    pd_, pn_, dn_ = to_fraction(pd), to_fraction(pn), to_fraction(dn)
    return validate_pmf({PP: pp, PD: pd_, DP: pd_, PN: pn_, NP: pn_, DD: dd, DN: dn_, ND: dn_, NN: nn})


def from_weights(weights: Iterable[int]) -> StatePmf:
    """Normalize six nonnegative integer weights (pp, pd, pn, dd, dn, nn) into a pmf."""
    pp, pd, pn, dd, dn, nn = (int(w) for w in weights)
    total = pp + 2 * pd + 2 * pn + dd + 2 * dn + nn
    if total <= 0:
        raise PmfError("all weights are zero")
    f = lambda w: Fraction(w, total)  # noqa: E731
    return symmetric_pmf(f(pp), f(pd), f(pn), f(dd), f(dn), f(nn))
