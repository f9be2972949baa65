"""Exact data model and orbifold Riemann-Roch evaluation for weighted baskets.

A minimal 3-fold of general type carries a finite collection of terminal
quotient singularities, each locally of type 1/r(1, -1, b) with gcd(b, r) = 1.
Reid's orbifold Riemann-Roch formula recovers every plurigenus P_m (m >= 2)
and the canonical volume K^3 from the multiset of these pairs together with
the second plurigenus P_2 and the holomorphic Euler characteristic chi(O).
This module implements that calculus with exact rational arithmetic:

    chi_m = m(m-1)(2m-1)/12 * K^3 + (1-2m) * chi + sum_i l((b_i, r_i), m)

where the local correction of a pair (b, r) is

    l((b, r), m) = sum_{j=1}^{m-1} v_j (r - v_j) / (2r),   v_j = j*b mod r,

and K^3 is pinned by requiring chi_2 = P_2:

    K^3 = 2*P_2 + 6*chi - sum_i b_i (r_i - b_i) / r_i.

Everything here is immutable and pure; values are `fractions.Fraction`
throughout (several of the interesting volumes differ by 1/420 or less, far
below any safe floating-point tolerance).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Union


class BasketError(ValueError):
    """Raised for invalid pairs, malformed basket text, or bad arguments."""


@dataclass(frozen=True, order=True)
class Pair:
    """A terminal quotient singularity 1/r(1, -1, b), normalized to b <= r/2.

    The local Riemann-Roch correction l(m) is invariant under b <-> r-b, so
    every pair is stored with the smaller representative.  Field order (r, b)
    gives the canonical sort used everywhere else.
    """

    r: int
    b: int

    def __post_init__(self) -> None:
        b, r = self.b, self.r
        if not (isinstance(b, int) and isinstance(r, int)):
            raise BasketError(f"pair ({b},{r}): entries must be integers")
        if r < 2:
            raise BasketError(f"pair ({b},{r}): local index r must be >= 2")
        if not 1 <= b <= r - 1:
            raise BasketError(f"pair ({b},{r}): b must lie in [1, r-1]")
        if math.gcd(b, r) != 1:
            raise BasketError(
                f"pair ({b},{r}): b and r share the factor {math.gcd(b, r)}"
            )
        if 2 * b > r:
            object.__setattr__(self, "b", r - b)

    def __str__(self) -> str:
        return f"({self.b},{self.r})"


def normalize_pair(b: int, r: int) -> Pair:
    """Validate (b, r) and return the canonical representative (min(b, r-b), r)."""
    return Pair(r, b)


_TERM_RE = re.compile(
    r"^(?:(?P<mult>\d+)\s*[x*×]\s*)?\(\s*(?P<b>\d+)\s*,\s*(?P<r>\d+)\s*\)$"
)


@dataclass(frozen=True)
class Basket:
    """A finite multiset of pairs, stored sorted by (r, b) with multiplicities.

    The text form is comma-separated ``(b,r)`` or ``k x (b,r)`` terms,
    whitespace-insensitive on input; canonical output is sorted with no
    spaces, e.g. ``7x(1,2),2x(1,3),(1,4),2x(2,5)``.  The empty basket is
    legal (a smooth minimal 3-fold) and prints as the empty string.
    """

    entries: tuple[tuple[Pair, int], ...] = ()

    def __post_init__(self) -> None:
        merged: dict[Pair, int] = {}
        for pair, mult in self.entries:
            if not isinstance(pair, Pair):
                raise BasketError(f"basket entry {pair!r} is not a Pair")
            if not (isinstance(mult, int) and mult >= 1):
                raise BasketError(f"multiplicity {mult!r} for {pair} must be >= 1")
            merged[pair] = merged.get(pair, 0) + mult
        object.__setattr__(
            self, "entries", tuple(sorted(merged.items(), key=lambda e: e[0]))
        )

    @classmethod
    def of(cls, *items: Union[Pair, tuple]) -> "Basket":
        """Build a basket from pairs, (b, r) tuples, or (mult, b, r) tuples."""
        entries = []
        for item in items:
            if isinstance(item, Pair):
                entries.append((item, 1))
            elif isinstance(item, tuple) and len(item) == 2:
                entries.append((normalize_pair(*item), 1))
            elif isinstance(item, tuple) and len(item) == 3:
                mult, b, r = item
                entries.append((normalize_pair(b, r), mult))
            else:
                raise BasketError(f"cannot interpret {item!r} as a basket entry")
        return cls(tuple(entries))

    @classmethod
    def parse(cls, text: str) -> "Basket":
        """Parse basket text; errors carry the offending term and its position."""
        stripped = text.strip()
        if not stripped:
            return cls()
        entries = []
        # Pairs contain commas themselves, so terms are split on the commas
        # sitting outside parentheses, tracking offsets for error messages.
        for index, (term, offset) in enumerate(_split_terms(text)):
            m = _TERM_RE.match(term.strip())
            if not m:
                raise BasketError(
                    f"basket text: cannot parse term {index + 1} "
                    f"({term.strip()!r}, at offset {offset})"
                )
            mult = int(m.group("mult")) if m.group("mult") else 1
            if mult < 1:
                raise BasketError(
                    f"basket text: multiplicity must be >= 1 in term {index + 1}"
                )
            entries.append((normalize_pair(int(m.group("b")), int(m.group("r"))), mult))
        return cls(tuple(entries))

    def counts(self) -> dict[Pair, int]:
        return dict(self.entries)

    def pairs(self) -> Iterator[Pair]:
        """Iterate pairs with multiplicity."""
        for pair, mult in self.entries:
            for _ in range(mult):
                yield pair

    def size(self) -> int:
        """Total number of pairs counted with multiplicity."""
        return sum(mult for _, mult in self.entries)

    def multiplicity(self, pair: Pair) -> int:
        return dict(self.entries).get(pair, 0)

    def replace(self, remove: Iterable[Pair], add: Iterable[Pair]) -> "Basket":
        """Return the basket with one copy of each `remove` pair swapped for `add`."""
        counts = self.counts()
        for pair in remove:
            if counts.get(pair, 0) < 1:
                raise BasketError(f"cannot remove {pair}: not present")
            counts[pair] -= 1
            if counts[pair] == 0:
                del counts[pair]
        for pair in add:
            counts[pair] = counts.get(pair, 0) + 1
        return Basket(tuple(counts.items()))

    def __str__(self) -> str:
        return ",".join(
            f"{mult}x{pair}" if mult > 1 else str(pair) for pair, mult in self.entries
        )


def _split_terms(text: str) -> list[tuple[str, int]]:
    """Split basket text on commas that sit outside parentheses."""
    terms: list[tuple[str, int]] = []
    depth = 0
    start = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise BasketError(f"basket text: unbalanced ')' at offset {i}")
        elif ch == "," and depth == 0:
            terms.append((text[start:i], start))
            start = i + 1
    if depth != 0:
        raise BasketError("basket text: unbalanced '('")
    terms.append((text[start:], start))
    return terms


def parse_basket(text: str) -> Basket:
    return Basket.parse(text)


@dataclass(frozen=True)
class WeightedBasket:
    """The full classification datum: a basket plus P_2 and chi(O).

    These three entries determine every plurigenus P_m (m >= 2) and the
    canonical volume; geometric validity additionally requires K^3 > 0,
    which is checked by :func:`validate`, not here.
    """

    basket: Basket
    p2: int
    chi: int

    def __post_init__(self) -> None:
        if not (isinstance(self.p2, int) and self.p2 >= 0):
            raise BasketError(f"P_2 must be a non-negative integer, got {self.p2!r}")
        if not isinstance(self.chi, int):
            raise BasketError(f"chi(O) must be an integer, got {self.chi!r}")

    def k3(self) -> Fraction:
        return k3(self)

    def plurigenus(self, m: int) -> Fraction:
        return plurigenus(self, m)

    def cartier_index(self) -> int:
        return cartier_index(self.basket)

    def sort_key(self):
        return (self.basket.entries, self.p2, self.chi)

    def __str__(self) -> str:
        return f"{{{self.basket}; P2={self.p2}, chi={self.chi}}}"


@lru_cache(maxsize=None)
def l_pair(pair: Pair, m: int) -> Fraction:
    """Local Riemann-Roch correction sum_{j<m} v_j(r - v_j)/(2r), v_j = jb mod r."""
    if not (isinstance(m, int) and m >= 1):
        raise BasketError(f"l_pair needs an integer m >= 1, got {m!r}")
    b, r = pair.b, pair.r
    total = 0
    for j in range(1, m):
        v = (j * b) % r
        total += v * (r - v)
    return Fraction(total, 2 * r)


@lru_cache(maxsize=None)
def _deficit(basket: Basket) -> Fraction:
    """sum_i b_i (r_i - b_i) / r_i over the basket, with multiplicity."""
    total = Fraction(0)
    for pair, mult in basket.entries:
        total += mult * Fraction(pair.b * (pair.r - pair.b), pair.r)
    return total


@lru_cache(maxsize=None)
def _l_sum(basket: Basket, m: int) -> Fraction:
    total = Fraction(0)
    for pair, mult in basket.entries:
        total += mult * l_pair(pair, m)
    return total


def k3(wb: WeightedBasket) -> Fraction:
    """Canonical volume: the unique K^3 with chi_2 = P_2 (may be <= 0)."""
    return 2 * wb.p2 + 6 * wb.chi - _deficit(wb.basket)


def plurigenus(wb: WeightedBasket, m: int) -> Fraction:
    """chi_m of the weighted basket; equals P_m for genuine 3-folds, m >= 2.

    Integrality is a downstream filter, not a precondition: arbitrary
    baskets may give non-integral values.
    """
    if not (isinstance(m, int) and m >= 2):
        raise BasketError(f"plurigenus is defined for integers m >= 2, got {m!r}")
    poly = Fraction(m * (m - 1) * (2 * m - 1), 12) * k3(wb)
    return poly + (1 - 2 * m) * wb.chi + _l_sum(wb.basket, m)


def cartier_index(basket: Basket) -> int:
    """lcm of the local indices r_i (1 for the empty basket)."""
    index = 1
    for pair, _ in basket.entries:
        index = math.lcm(index, pair.r)
    return index


@dataclass(frozen=True)
class ValidityReport:
    """Outcome of :func:`validate`: empty `problems` means valid."""

    problems: tuple[str, ...]
    k3: Fraction | None = None

    def __bool__(self) -> bool:
        return not self.problems


RawEntries = Iterable[tuple]


def validate(
    subject: Union[WeightedBasket, RawEntries],
    p2: int | None = None,
    chi: int | None = None,
    integrality_depth: int | None = None,
) -> ValidityReport:
    """Collect every failed validity predicate instead of raising.

    `subject` is either a WeightedBasket or raw entries ((b, r) or
    (mult, b, r) tuples) together with p2 and chi.  Checks pair validity,
    K^3 > 0, and (optionally) integrality of chi_m for 2 <= m <= depth.
    """
    problems: list[str] = []
    if isinstance(subject, WeightedBasket):
        wb = subject
    else:
        entries = []
        for item in subject:
            try:
                if len(item) == 2:
                    entries.append((normalize_pair(*item), 1))
                else:
                    mult, b, r = item
                    entries.append((normalize_pair(b, r), mult))
            except BasketError as exc:
                problems.append(f"invalid pair: {exc}")
        if p2 is None or chi is None:
            raise BasketError("validate on raw entries needs p2 and chi")
        if problems:
            return ValidityReport(tuple(problems))
        wb = WeightedBasket(Basket(tuple(entries)), p2, chi)

    volume = k3(wb)
    if volume <= 0:
        problems.append(f"K^3 = {volume} <= 0")
    if integrality_depth is not None:
        for m in range(2, integrality_depth + 1):
            value = plurigenus(wb, m)
            if value.denominator != 1:
                problems.append(f"chi_{m} = {value} is not an integer")
    return ValidityReport(tuple(problems), k3=volume)
