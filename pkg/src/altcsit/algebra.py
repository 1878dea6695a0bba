"""Formal linear combinations of transmit symbols with channel-dependent coefficients.

A coefficient is a polynomial with rational constants over two kinds of channel factors:

* ``("h", user, slot, k)``: entry ``k`` of receiver ``user``'s channel row at ``slot``;
* ``("g", user, slot, beam_user)``: gain ``H_user(slot) . H_beam_user(slot)^perp`` seen by
  ``user`` through a beam nulled at ``beam_user``. It is structurally zero when the two
  users coincide, so such terms are dropped at construction.

Every factor is tagged with the (user, slot) channel rows it reads, which is what the
CSIT ledger checks.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping, Union

import numpy as np

Factor = tuple[str, int, int, int]
Monomial = tuple[Factor, ...]
Symbol = tuple[str, int]  # ("u"|"v"|"q", 1-based index)
Scalar = Union[int, Fraction]


def entry(user: int, slot: int, k: int) -> "Poly":
    return Poly({(("h", user, slot, k),): Fraction(1)})


def gain(user: int, slot: int, beam_user: int) -> "Poly":
    if user == beam_user:
        return Poly({})
    return Poly({(("g", user, slot, beam_user),): Fraction(1)})


def factor_refs(f: Factor) -> set[tuple[int, int]]:
    kind, user, slot, extra = f
    if kind == "h":
        return {(user, slot)}
    return {(user, slot), (extra, slot)}


def swap_factor(f: Factor) -> Factor:
    kind, user, slot, extra = f
    if kind == "h":
        return (kind, 3 - user, slot, extra)
    return (kind, 3 - user, slot, 3 - extra)


def factor_str(f: Factor) -> str:
    kind, user, slot, extra = f
    if kind == "h":
        return f"h{user}{extra}({slot})"
    return f"H{user}({slot})H{extra}({slot})perp"


class Poly:
    """Sparse polynomial: monomial -> rational coefficient."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Fraction]):
        self.terms = {m: c for m, c in terms.items() if c != 0}

    @staticmethod
    def const(c: Scalar) -> "Poly":
        return Poly({(): Fraction(c)})

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()})

    def __mul__(self, other: "Poly | Scalar") -> "Poly":
        if not isinstance(other, Poly):
            return Poly({m: c * other for m, c in self.terms.items()})
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(sorted(m1 + m2))
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def factors(self) -> set[Factor]:
        return {f for m in self.terms for f in m}

    def refs(self) -> set[tuple[int, int]]:
        out: set[tuple[int, int]] = set()
        for f in self.factors():
            out |= factor_refs(f)
        return out

    def map_factors(self, fn: Callable[[Factor], Factor]) -> "Poly":
        out: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            key = tuple(sorted(fn(f) for f in m))
            out[key] = out.get(key, Fraction(0)) + c
        return Poly(out)

    def evaluate(self, values: Mapping[Factor, complex]) -> complex:
        total = 0j
        for m, c in self.terms.items():
            term = complex(c)
            for f in m:
                term *= values[f]
            total += term
        return total

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in sorted(self.terms.items()):
            body = "*".join(factor_str(f) for f in m)
            if not body:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            else:
                parts.append(f"({c})*{body}")
        return " + ".join(parts)


class LinForm:
    """Linear combination ``sum_s coeff_s * s`` over transmit symbols."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[Symbol, Poly] | None = None):
        self.coeffs = {s: p for s, p in (coeffs or {}).items() if p}

    @staticmethod
    def symbol(kind: str, index: int) -> "LinForm":
        return LinForm({(kind, index): Poly.const(1)})

    def __add__(self, other: "LinForm") -> "LinForm":
        out = dict(self.coeffs)
        for s, p in other.coeffs.items():
            out[s] = out[s] + p if s in out else p
        return LinForm(out)

    def __sub__(self, other: "LinForm") -> "LinForm":
        return self + other * -1

    def __mul__(self, k: "Poly | Scalar") -> "LinForm":
        return LinForm({s: p * k for s, p in self.coeffs.items()})

    __rmul__ = __mul__

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def refs(self) -> set[tuple[int, int]]:
        out: set[tuple[int, int]] = set()
        for p in self.coeffs.values():
            out |= p.refs()
        return out

    def factors(self) -> set[Factor]:
        out: set[Factor] = set()
        for p in self.coeffs.values():
            out |= p.factors()
        return out

    def symbols(self) -> set[Symbol]:
        return set(self.coeffs)

    def map(self, sym_fn: Callable[[Symbol], Symbol], factor_fn: Callable[[Factor], Factor]) -> "LinForm":
        out: dict[Symbol, Poly] = {}
        for s, p in self.coeffs.items():
            t = sym_fn(s)
            q = p.map_factors(factor_fn)
            out[t] = out[t] + q if t in out else q
        return LinForm(out)

    def row(self, columns: Mapping[Symbol, int], width: int, values: Mapping[Factor, complex]) -> np.ndarray:
        r = np.zeros(width, dtype=complex)
        for s, p in self.coeffs.items():
            r[columns[s]] = p.evaluate(values)
        return r

    def table(self) -> dict[str, str]:
        return {f"{k}{i}": str(p) for (k, i), p in sorted(self.coeffs.items())}


def total(forms: Iterable[LinForm]) -> LinForm:
    out = LinForm()
    for f in forms:
        out = out + f
    return out
