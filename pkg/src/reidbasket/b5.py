"""Synthesis and enumeration of initial baskets from plurigenus data.

For a minimal 3-fold of general type, the maximally unpacked basket
consistent with chi(O) and P_2..P_6 is supported on (1,2), (2,5), (1,3),
(1,4) plus a tail of (1,r) points with r >= 5, and its multiplicities are
linear in the plurigenus data:

    n_{1,2} = 3*chi + 6*P2 - 3*P3 +   P4 - 2*P5 + P6 + sigma5
    n_{2,5} = 2*chi        -   P3        + 2*P5 - P6 - sigma5
    n_{1,3} = 2*chi + 2*P2 + 3*P3 - 3*P4 -   P5 + P6 + sigma5
    n_{1,4} =   chi - 3*P2 +   P3 + 2*P4 -   P5      - sigma5
    n_{1,r} (r >= 5) free, with sigma5 = sum of the tail multiplicities.

Feasibility means every coefficient is >= 0; in particular sigma5 is
bounded by 2*chi - P3 + 2*P5 - P6 (that bound is exactly n_{2,5} >= 0).
Every emitted result is round-trip checked: evaluating chi_m of the built
basket must return P_3..P_6 of the generating data exactly, which guards
the transcription of the formulas above.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, NamedTuple, Sequence

from .basket import Basket, BasketError, Pair, WeightedBasket, k3, plurigenus


class InfeasibleDataError(BasketError):
    """Plurigenus data admits no valid initial basket; names the violated relation."""


class B5Coefficients(NamedTuple):
    n12: int
    n25: int
    n13: int
    n14: int


@dataclass(frozen=True)
class PlurigenusData:
    """chi(O), P_2..P_6, and the (1,r)-tail (r >= 5) with sigma5 entries."""

    chi: int
    p2: int
    p3: int
    p4: int
    p5: int
    p6: int
    sigma5: int = 0
    tail: tuple[tuple[int, int], ...] = ()  # sorted (r, multiplicity), r >= 5

    def __post_init__(self) -> None:
        for name in ("p2", "p3", "p4", "p5", "p6"):
            if getattr(self, name) < 0:
                raise BasketError(f"{name} must be >= 0")
        if self.sigma5 < 0:
            raise BasketError("sigma5 must be >= 0")
        tail = tuple(sorted((int(r), int(mult)) for r, mult in self.tail))
        for r, mult in tail:
            if r < 5:
                raise BasketError(f"tail index r={r} must be >= 5")
            if mult < 1:
                raise BasketError(f"tail multiplicity for r={r} must be >= 1")
        if sum(mult for _, mult in tail) != self.sigma5:
            raise BasketError("tail multiplicities must sum to sigma5")
        object.__setattr__(self, "tail", tail)

    @property
    def p(self) -> tuple[int, int, int, int, int]:
        return (self.p2, self.p3, self.p4, self.p5, self.p6)

    def __str__(self) -> str:
        tail = ",".join(f"{m}x(1,{r})" if m > 1 else f"(1,{r})" for r, m in self.tail)
        return (
            f"chi={self.chi}, P2..P6={self.p}, sigma5={self.sigma5}"
            + (f", tail={tail}" if tail else "")
        )


@dataclass(frozen=True)
class B5Result:
    """The synthesized basket with its coefficient vector and volume."""

    basket: Basket
    coefficients: B5Coefficients
    k3: Fraction

    def weighted(self, data: PlurigenusData) -> WeightedBasket:
        return WeightedBasket(self.basket, data.p2, data.chi)


def sigma5_bound(chi: int, p3: int, p5: int, p6: int) -> int:
    """Upper bound for sigma5 (equivalently: n_{2,5} >= 0 at sigma5 = 0)."""
    return 2 * chi - p3 + 2 * p5 - p6


def b5_coefficients(data: PlurigenusData) -> B5Result:
    """Evaluate the multiplicity formulas; reject infeasible data.

    Raises InfeasibleDataError naming the violated relation when the sigma5
    bound fails or any coefficient comes out negative.  The round-trip
    check (chi_m = P_m for m = 3..6) is mandatory and would signal a broken
    formula transcription, not bad input.
    """
    chi, p2, p3, p4, p5, p6 = data.chi, data.p2, data.p3, data.p4, data.p5, data.p6
    s5 = data.sigma5
    bound = sigma5_bound(chi, p3, p5, p6)
    if s5 > bound:
        raise InfeasibleDataError(
            f"sigma5 bound violated: sigma5 = {s5} > 2*chi - P3 + 2*P5 - P6 = {bound}"
        )
    coeffs = B5Coefficients(
        n12=3 * chi + 6 * p2 - 3 * p3 + p4 - 2 * p5 + p6 + s5,
        n25=2 * chi - p3 + 2 * p5 - p6 - s5,
        n13=2 * chi + 2 * p2 + 3 * p3 - 3 * p4 - p5 + p6 + s5,
        n14=chi - 3 * p2 + p3 + 2 * p4 - p5 - s5,
    )
    for name, value in zip(("n_{1,2}", "n_{2,5}", "n_{1,3}", "n_{1,4}"), coeffs):
        if value < 0:
            raise InfeasibleDataError(f"negative coefficient: {name} = {value}")

    entries: list[tuple[Pair, int]] = []
    for (b, r), mult in zip(((1, 2), (2, 5), (1, 3), (1, 4)), coeffs):
        if mult > 0:
            entries.append((Pair(r, b), mult))
    for r, mult in data.tail:
        entries.append((Pair(r, 1), mult))
    basket = Basket(tuple(entries))
    wb = WeightedBasket(basket, p2, chi)
    for m, expected in ((3, p3), (4, p4), (5, p5), (6, p6)):
        got = plurigenus(wb, m)
        if got != expected:
            raise RuntimeError(
                f"round-trip failure: chi_{m}({basket}) = {got}, expected {expected}"
            )
    return B5Result(basket=basket, coefficients=coeffs, k3=k3(wb))


IntRange = tuple[int, int]


@dataclass(frozen=True)
class EnumerationReport:
    """Bookkeeping for an enumeration run.

    `boxes_scanned` counts (chi, P2..P6) tuples examined; `candidates` the
    fully evaluated (sigma5, tail) combinations surviving the integer
    feasibility screen.  `tail_cutoff_accepted` counts accepted candidates
    with a tail entry at tail_r_max; `tail_cutoff_truncates` is True when
    bumping such an entry to tail_r_max + 1 would still pass the volume
    filters, i.e. the cutoff genuinely truncated the list.
    """

    boxes_scanned: int
    candidates: int
    accepted: int
    tail_cutoff_accepted: int
    tail_cutoff_truncates: bool


def _feasible_tails(
    size: int, r_max: int, budget: Fraction | None, strict_budget: Fraction | None
) -> Iterator[tuple[int, ...]]:
    """Non-decreasing tail index tuples whose deficit sum((r-1)/r) fits the budget.

    `budget` is the non-strict cap on the tail deficit (volume floor),
    `strict_budget` the strict one (K^3 > 0).  Costs (r-1)/r increase with
    r and the tuple is non-decreasing, so a failing r prunes all larger r.
    """
    if size == 0:
        yield ()
        return

    def rec(prefix: tuple[int, ...], start: int, spent: Fraction) -> Iterator[tuple[int, ...]]:
        remaining = size - len(prefix)
        if remaining == 0:
            yield prefix
            return
        for r in range(start, r_max + 1):
            cost = Fraction(r - 1, r)
            total_min = spent + cost * remaining  # later entries cost at least this much
            if budget is not None and total_min > budget:
                break
            if strict_budget is not None and total_min >= strict_budget:
                break
            yield from rec(prefix + (r,), r, spent + cost)

    yield from rec((), 5, Fraction(0))


def enumerate_b5(
    chi_range: IntRange,
    p_ranges: Sequence[IntRange],
    tail_r_max: int = 30,
    extra_filters: Iterable[Callable[[PlurigenusData, B5Result], bool]] = (),
    k3_floor: Fraction | None = None,
    require_positive_k3: bool = True,
    sigma5_max: int | None = None,
) -> tuple[list[tuple[PlurigenusData, B5Result]], EnumerationReport]:
    """Exhaustively enumerate feasible (data, basket) over the given box.

    `p_ranges` lists inclusive (lo, hi) ranges for P_2..P_6 in order.
    sigma5 runs over its feasibility window (optionally capped) and tails
    over all multisets from {5..tail_r_max} of that size that fit the
    volume budget.  Infeasible regions are screened out with integer
    arithmetic before any basket is built, which keeps large boxes cheap;
    the screen is exact, not heuristic, so the output is still exhaustive,
    duplicate-free, canonically ordered and deterministic.
    """
    if len(p_ranges) != 5:
        raise BasketError("p_ranges must give five (lo, hi) ranges for P_2..P_6")
    if tail_r_max < 5:
        raise BasketError("tail_r_max must be >= 5")
    results: list[tuple[PlurigenusData, B5Result]] = []
    boxes_scanned = 0
    candidates = 0
    boundary_accepted = 0
    boundary_truncates = False
    filters = tuple(extra_filters)

    def passes(data: PlurigenusData, res: B5Result) -> bool:
        if require_positive_k3 and res.k3 <= 0:
            return False
        if k3_floor is not None and res.k3 < k3_floor:
            return False
        return all(f(data, res) for f in filters)

    chi_lo, chi_hi = chi_range
    (p2a, p2b), (p3a, p3b), (p4a, p4b), (p5a, p5b), (p6a, p6b) = p_ranges
    floor60 = None if k3_floor is None else 60 * k3_floor
    for chi in range(chi_lo, chi_hi + 1):
        for p2 in range(p2a, p2b + 1):
            base60 = 120 * p2 + 360 * chi
            for p3 in range(p3a, p3b + 1):
                for p4 in range(p4a, p4b + 1):
                    for p5 in range(p5a, p5b + 1):
                        for p6 in range(p6a, p6b + 1):
                            boxes_scanned += 1
                            # coefficient values at sigma5 = 0
                            n12_0 = 3 * chi + 6 * p2 - 3 * p3 + p4 - 2 * p5 + p6
                            n25_0 = 2 * chi - p3 + 2 * p5 - p6  # = sigma5 bound
                            n13_0 = 2 * chi + 2 * p2 + 3 * p3 - 3 * p4 - p5 + p6
                            n14_0 = chi - 3 * p2 + p3 + 2 * p4 - p5
                            s_lo = max(0, -n12_0, -n13_0)
                            s_hi = min(n25_0, n14_0)
                            if sigma5_max is not None:
                                s_hi = min(s_hi, sigma5_max)
                            for s5 in range(s_lo, s_hi + 1):
                                # minimal deficit (all-r=5 tail), scaled by 60;
                                # increases by 1 per extra sigma5, so the first
                                # violation of the floor ends the loop.
                                d60 = (
                                    30 * (n12_0 + s5)
                                    + 72 * (n25_0 - s5)
                                    + 40 * (n13_0 + s5)
                                    + 45 * (n14_0 - s5)
                                    + 48 * s5
                                )
                                k3_60_best = base60 - d60
                                if floor60 is not None and k3_60_best < floor60:
                                    break
                                if require_positive_k3 and k3_60_best <= 0:
                                    break
                                base_k3 = Fraction(base60 - d60 + 48 * s5, 60)
                                budget = None if k3_floor is None else base_k3 - k3_floor
                                strict = base_k3 if require_positive_k3 else None
                                for tail_rs in _feasible_tails(
                                    s5, tail_r_max, budget, strict
                                ):
                                    tail = tuple(
                                        (r, len(list(grp)))
                                        for r, grp in itertools.groupby(tail_rs)
                                    )
                                    candidates += 1
                                    data = PlurigenusData(chi, p2, p3, p4, p5, p6, s5, tail)
                                    res = b5_coefficients(data)
                                    if not passes(data, res):
                                        continue
                                    results.append((data, res))
                                    if tail_rs and max(tail_rs) == tail_r_max:
                                        boundary_accepted += 1
                                        if _would_accept_past_cutoff(
                                            data, tail_r_max, passes
                                        ):
                                            boundary_truncates = True

    results.sort(key=lambda item: (_data_key(item[0]), item[1].basket.entries))
    report = EnumerationReport(
        boxes_scanned=boxes_scanned,
        candidates=candidates,
        accepted=len(results),
        tail_cutoff_accepted=boundary_accepted,
        tail_cutoff_truncates=boundary_truncates,
    )
    return results, report


def _data_key(d: PlurigenusData):
    return (d.chi, d.p2, d.p3, d.p4, d.p5, d.p6, d.sigma5, d.tail)


def _would_accept_past_cutoff(
    data: PlurigenusData,
    tail_r_max: int,
    passes: Callable[[PlurigenusData, B5Result], bool],
) -> bool:
    """Probe the accepted boundary candidate with one tail index bumped to r_max+1.

    chi_m (m <= 6) does not depend on the tail indices, only K^3 does, so
    this single probe decides whether the cutoff hid further candidates.
    """
    bumped = dict(data.tail)
    bumped[tail_r_max] -= 1
    if bumped[tail_r_max] == 0:
        del bumped[tail_r_max]
    bumped[tail_r_max + 1] = bumped.get(tail_r_max + 1, 0) + 1
    probe = PlurigenusData(
        data.chi, data.p2, data.p3, data.p4, data.p5, data.p6,
        data.sigma5, tuple(sorted(bumped.items())),
    )
    try:
        res = b5_coefficients(probe)
    except InfeasibleDataError:
        return False
    return passes(probe, res)
