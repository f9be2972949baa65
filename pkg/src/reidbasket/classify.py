"""Scenario engine: enumerate initial baskets, pack them down, filter, report.

A classification scenario fixes finite boxes for chi(O) and P_2..P_6
(optionally pinning chi_7/chi_8 to allowed sets), synthesizes every
feasible initial basket over the box, and then walks each basket's packing
closure.  A node survives into the refined list when it passes every
active filter *as a standalone object*: volume floor, plurigenus
consistency with the generating data, Cartier-index divisibility and
chi_m integrality.  Failing nodes are dropped but their children are still
explored (consistency is not monotone along packings); only the volume
floor prunes subtrees, which is sound because packing strictly decreases
K^3.

Two scenarios ship built in:

* ``run_pg1`` -- geometric genus one, chi(O) = 1, P_2 = P_3 = 1, P_4 = 2,
  split into three sub-cases by (P_5, P_6) with pinned chi_7/chi_8 and
  volume floors 1/60, 1/60, 1/70; its refined output is the known
  five-element exceptional list.
* ``run_pg3`` -- geometric genus three over chi(O) in {-2, -1},
  6 <= P2 <= 8, P3 <= 14, P4 <= 25, P5 <= 40, P6 <= 63, volume floor 4/3,
  and 3 | r_X applied to final baskets only.  The refined output is the
  candidate list for the genus-three exceptional set.

Every run emits a manifest recording each active filter verbatim, all
candidate counts, and timing, sufficient to re-run bit-identically.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import __version__
from .b5 import B5Result, PlurigenusData, b5_coefficients, enumerate_b5, InfeasibleDataError
from .basket import Basket, BasketError, WeightedBasket, cartier_index, k3, plurigenus
from .packing import packing_closure

IntRange = tuple[int, int]


def pm_upper_bound(m1: int, j: int | None = None) -> int:
    """Plurigenus cap j*m1*(m1-1)/2 + 2j, valid for j > 2*m1 - 1 (default j = 2*m1)."""
    if not (isinstance(m1, int) and m1 >= 2):
        raise BasketError(f"pm_upper_bound needs an integer m1 >= 2, got {m1!r}")
    if j is None:
        j = 2 * m1
    if not (isinstance(j, int) and j > 2 * m1 - 1):
        raise BasketError(f"j must be an integer > 2*m1 - 1 = {2 * m1 - 1}, got {j!r}")
    return j * m1 * (m1 - 1) // 2 + 2 * j


@dataclass(frozen=True)
class SuperadditivityCheck:
    m: int
    n: int
    p_m: Fraction
    p_n: Fraction
    p_mn: Fraction
    ok: bool


def check_superadditivity(
    wb: WeightedBasket, pairs: Iterable[tuple[int, int]]
) -> tuple[SuperadditivityCheck, ...]:
    """Evaluate P_{m+n} >= P_m + P_n for the listed (m, n) instances, m, n >= 2."""
    checks = []
    for m, n in pairs:
        if m < 2 or n < 2:
            raise BasketError(f"superadditivity instances need m, n >= 2, got ({m},{n})")
        p_m, p_n, p_mn = plurigenus(wb, m), plurigenus(wb, n), plurigenus(wb, m + n)
        checks.append(SuperadditivityCheck(m, n, p_m, p_n, p_mn, p_mn >= p_m + p_n))
    return tuple(checks)


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete, explicit filter set for a classification run.

    Ranges are inclusive.  chi_7/chi_8 pins (when given) constrain the
    *refined* baskets; consistency_depth says how far chi_m of a refined
    basket must agree with the generating plurigenus data (capped at 6 for
    equality pins, with 7 and 8 handled by the allowed sets).
    Superadditivity instances (m, n) are enforced per candidate as
    chi_{m+n} >= P_m + P_n.  Every field is echoed into the run manifest.
    """

    name: str
    chi_range: IntRange
    p2_range: IntRange
    p3_range: IntRange
    p4_range: IntRange
    p5_range: IntRange
    p6_range: IntRange
    k3_floor: Fraction
    p7_allowed: tuple[int, ...] | None = None
    p8_allowed: tuple[int, ...] | None = None
    rx_divisor: int | None = None
    tail_r_max: int = 30
    sigma5_max: int | None = None
    consistency_depth: int = 6
    integrality_depth: int = 12
    superadditivity_pairs: tuple[tuple[int, int], ...] = ()
    require_monotone_pm: bool = False
    max_depth: int | None = None

    def p_ranges(self) -> list[IntRange]:
        return [self.p2_range, self.p3_range, self.p4_range, self.p5_range, self.p6_range]

    def filter_strings(self) -> list[str]:
        """Human-readable list of every active constraint, constants verbatim."""
        lo, hi = self.chi_range
        chis = ", ".join(str(c) for c in range(lo, hi + 1))
        out = [f"chi(O) in {{{chis}}}"]
        for label, (a, b) in zip(("P2", "P3", "P4", "P5", "P6"), self.p_ranges()):
            out.append(f"{a} <= {label} <= {b}" if a > 0 else f"{label} <= {b}")
        if self.require_monotone_pm:
            out.append("P2 <= P3 <= P4 <= P5 <= P6")
        for m, n in self.superadditivity_pairs:
            out.append(f"P{m + n} >= P{m} + P{n}")
        out.append(
            "coefficients n_(1,2), n_(2,5), n_(1,3), n_(1,4) >= 0; "
            "sigma5 <= 2*chi - P3 + 2*P5 - P6"
        )
        out.append(f"tail indices 5 <= r <= {self.tail_r_max}")
        out.append(f"K^3 >= {self.k3_floor}")
        out.append(
            f"chi_m = P_m for 3 <= m <= {min(self.consistency_depth, 6)} along packings"
        )
        if self.p7_allowed is not None and self.consistency_depth >= 7:
            out.append(f"chi_7 in {{{', '.join(map(str, self.p7_allowed))}}}")
        if self.p8_allowed is not None and self.consistency_depth >= 8:
            out.append(f"chi_8 in {{{', '.join(map(str, self.p8_allowed))}}}")
        if self.rx_divisor is not None:
            out.append(
                f"r_X divisible by {self.rx_divisor} "
                "(applied to final baskets, not to the initial synthesis)"
            )
        out.append(f"chi_m integral for 2 <= m <= {self.integrality_depth}")
        return out

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "chi_range": list(self.chi_range),
            "p2_range": list(self.p2_range),
            "p3_range": list(self.p3_range),
            "p4_range": list(self.p4_range),
            "p5_range": list(self.p5_range),
            "p6_range": list(self.p6_range),
            "k3_floor": _frac_str(self.k3_floor),
            "p7_allowed": list(self.p7_allowed) if self.p7_allowed is not None else None,
            "p8_allowed": list(self.p8_allowed) if self.p8_allowed is not None else None,
            "rx_divisor": self.rx_divisor,
            "tail_r_max": self.tail_r_max,
            "sigma5_max": self.sigma5_max,
            "consistency_depth": self.consistency_depth,
            "integrality_depth": self.integrality_depth,
            "superadditivity_pairs": [list(p) for p in self.superadditivity_pairs],
            "require_monotone_pm": self.require_monotone_pm,
            "max_depth": self.max_depth,
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "ScenarioConfig":
        def rng(key: str) -> IntRange:
            a, b = obj[key]
            return (int(a), int(b))

        return cls(
            name=str(obj.get("name", "custom")),
            chi_range=rng("chi_range"),
            p2_range=rng("p2_range"),
            p3_range=rng("p3_range"),
            p4_range=rng("p4_range"),
            p5_range=rng("p5_range"),
            p6_range=rng("p6_range"),
            k3_floor=_parse_frac(obj["k3_floor"]),
            p7_allowed=tuple(obj["p7_allowed"]) if obj.get("p7_allowed") is not None else None,
            p8_allowed=tuple(obj["p8_allowed"]) if obj.get("p8_allowed") is not None else None,
            rx_divisor=obj.get("rx_divisor"),
            tail_r_max=int(obj.get("tail_r_max", 30)),
            sigma5_max=obj.get("sigma5_max"),
            consistency_depth=int(obj.get("consistency_depth", 6)),
            integrality_depth=int(obj.get("integrality_depth", 12)),
            superadditivity_pairs=tuple(
                (int(m), int(n)) for m, n in obj.get("superadditivity_pairs", ())
            ),
            require_monotone_pm=bool(obj.get("require_monotone_pm", False)),
            max_depth=obj.get("max_depth"),
        )


def _frac_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _parse_frac(text) -> Fraction:
    if isinstance(text, int):
        return Fraction(text)
    return Fraction(str(text))


@dataclass(frozen=True)
class ClassificationResult:
    """Raw synthesis candidates, refined basket list, and the run manifest."""

    raw: tuple[tuple[PlurigenusData, B5Result], ...]
    refined: tuple[WeightedBasket, ...]
    manifest: dict


def _raw_filters(cfg: ScenarioConfig):
    def monotone(data: PlurigenusData, res: B5Result) -> bool:
        return data.p2 <= data.p3 <= data.p4 <= data.p5 <= data.p6

    def superadditive(data: PlurigenusData, res: B5Result) -> bool:
        wb = res.weighted(data)
        values = {2: data.p2, 3: data.p3, 4: data.p4, 5: data.p5, 6: data.p6}
        for m, n in cfg.superadditivity_pairs:
            total = values[m + n] if m + n <= 6 else plurigenus(wb, m + n)
            if total < values[m] + values[n]:
                return False
        return True

    filters = []
    if cfg.require_monotone_pm:
        filters.append(monotone)
    if cfg.superadditivity_pairs:
        filters.append(superadditive)
    return filters


def _pins_for(data: PlurigenusData, cfg: ScenarioConfig) -> dict[int, frozenset[int]]:
    """Per-m allowed chi_m values a refined basket must satisfy."""
    generated = {3: data.p3, 4: data.p4, 5: data.p5, 6: data.p6}
    pins: dict[int, frozenset[int]] = {}
    for m in range(3, min(cfg.consistency_depth, 6) + 1):
        pins[m] = frozenset({generated[m]})
    if cfg.consistency_depth >= 7 and cfg.p7_allowed is not None:
        pins[7] = frozenset(cfg.p7_allowed)
    if cfg.consistency_depth >= 8 and cfg.p8_allowed is not None:
        pins[8] = frozenset(cfg.p8_allowed)
    return pins


def _refined_problems(
    wb: WeightedBasket, pins: Mapping[int, frozenset[int]], cfg: ScenarioConfig
) -> list[str]:
    """Filter violations for a refined candidate, computed from scratch."""
    problems = []
    volume = k3(wb)
    if volume < cfg.k3_floor:
        problems.append(f"K^3 = {volume} < {cfg.k3_floor}")
    for m in sorted(pins):
        value = plurigenus(wb, m)
        if value.denominator != 1 or value.numerator not in pins[m]:
            problems.append(f"chi_{m} = {value} not in {sorted(pins[m])}")
    if cfg.rx_divisor is not None and cartier_index(wb.basket) % cfg.rx_divisor != 0:
        problems.append(f"r_X = {cartier_index(wb.basket)} not divisible by {cfg.rx_divisor}")
    for m in range(2, cfg.integrality_depth + 1):
        value = plurigenus(wb, m)
        if value.denominator != 1:
            problems.append(f"chi_{m} = {value} is not an integer")
    return problems


def revalidate_raw(
    data: PlurigenusData, res: B5Result, cfg: ScenarioConfig
) -> list[str]:
    """Re-check a raw candidate against every raw-stage filter, from scratch."""
    problems = []
    if not cfg.chi_range[0] <= data.chi <= cfg.chi_range[1]:
        problems.append(f"chi = {data.chi} outside {cfg.chi_range}")
    for label, value, (a, b) in zip(
        ("P2", "P3", "P4", "P5", "P6"), data.p, cfg.p_ranges()
    ):
        if not a <= value <= b:
            problems.append(f"{label} = {value} outside [{a}, {b}]")
    try:
        fresh = b5_coefficients(data)
    except InfeasibleDataError as exc:
        problems.append(str(exc))
        return problems
    if fresh.basket != res.basket:
        problems.append("basket does not match a fresh synthesis")
    volume = k3(res.weighted(data))
    if volume <= 0:
        problems.append(f"K^3 = {volume} <= 0")
    if volume < cfg.k3_floor:
        problems.append(f"K^3 = {volume} < {cfg.k3_floor}")
    for f in _raw_filters(cfg):
        if not f(data, res):
            problems.append("monotonicity/superadditivity filter violated")
    return problems


def run_scenario(cfg: ScenarioConfig) -> ClassificationResult:
    """Execute one scenario: synthesize, pack, filter, re-validate, report."""
    t0 = time.perf_counter()
    raw, enum_report = enumerate_b5(
        cfg.chi_range,
        cfg.p_ranges(),
        tail_r_max=cfg.tail_r_max,
        extra_filters=_raw_filters(cfg),
        k3_floor=cfg.k3_floor,
        sigma5_max=cfg.sigma5_max,
    )

    refined: dict[WeightedBasket, PlurigenusData] = {}
    closure_nodes = 0
    for data, res in raw:
        root = res.weighted(data)
        pins = _pins_for(data, cfg)
        for node, _, _ in packing_closure(root, cfg.k3_floor, cfg.max_depth):
            closure_nodes += 1
            if node not in refined and not _refined_problems(node, pins, cfg):
                refined[node] = data
    refined_sorted = tuple(sorted(refined, key=WeightedBasket.sort_key))

    # Path-independent re-validation: every reported element is re-checked
    # against the filters from scratch, pins re-derived from its recorded
    # generating data (validation logic is separate from search logic).
    revalidation_failures: list[str] = []
    for data, res in raw:
        for problem in revalidate_raw(data, res, cfg):
            revalidation_failures.append(f"raw {data}: {problem}")
    for wb in refined_sorted:
        for problem in _refined_problems(wb, _pins_for(refined[wb], cfg), cfg):
            revalidation_failures.append(f"refined {wb}: {problem}")

    manifest = {
        "command": f"classify {cfg.name}",
        "engine_version": __version__,
        "config": cfg.to_json_dict(),
        "filters": cfg.filter_strings(),
        "counts": {
            "enumeration_candidates": enum_report.candidates,
            "raw": len(raw),
            "closure_nodes": closure_nodes,
            "refined": len(refined_sorted),
        },
        "tail_cutoff": {
            "accepted_at_cutoff": enum_report.tail_cutoff_accepted,
            "truncates": enum_report.tail_cutoff_truncates,
        },
        "revalidation_failures": revalidation_failures,
        "timing_seconds": round(time.perf_counter() - t0, 3),
    }
    return ClassificationResult(tuple(raw), refined_sorted, manifest)


# ---------------------------------------------------------------------------
# Built-in scenarios
# ---------------------------------------------------------------------------

def pg1_subcase_configs() -> tuple[ScenarioConfig, ...]:
    """The three genus-one sub-cases: chi = 1, P2 = P3 = 1, P4 = 2.

    Sub-case pins (P5, P6, chi_7, chi_8, volume floor):

      1. P5 = 3, P6 = 3, chi_7 = 4, chi_8 in {4, 5}, K^3 >= 1/60
      2. P5 = 2, P6 = 4, chi_7 = 4, chi_8 = 5,      K^3 >= 1/60
      3. P5 = 2, P6 = 3, chi_7 = 3, chi_8 in {4, 5}, K^3 >= 1/70
    """
    common = dict(
        chi_range=(1, 1),
        p2_range=(1, 1),
        p3_range=(1, 1),
        p4_range=(2, 2),
        consistency_depth=8,
        integrality_depth=8,
        tail_r_max=30,
    )
    return (
        ScenarioConfig(
            name="pg1-case1",
            p5_range=(3, 3),
            p6_range=(3, 3),
            p7_allowed=(4,),
            p8_allowed=(4, 5),
            k3_floor=Fraction(1, 60),
            **common,
        ),
        ScenarioConfig(
            name="pg1-case2",
            p5_range=(2, 2),
            p6_range=(4, 4),
            p7_allowed=(4,),
            p8_allowed=(5,),
            k3_floor=Fraction(1, 60),
            **common,
        ),
        ScenarioConfig(
            name="pg1-case3",
            p5_range=(2, 2),
            p6_range=(3, 3),
            p7_allowed=(3,),
            p8_allowed=(4, 5),
            k3_floor=Fraction(1, 70),
            **common,
        ),
    )


def run_pg1(subcase: int | None = None) -> ClassificationResult:
    """Genus-one scenario; refined output is the five exceptional baskets.

    `subcase` (1..3) restricts to a single sub-case.  A mismatch against
    the shipped reference list is a test failure, not a runtime error.
    """
    configs = pg1_subcase_configs()
    if subcase is not None:
        if subcase not in (1, 2, 3):
            raise BasketError(f"subcase must be 1, 2 or 3, got {subcase!r}")
        configs = (configs[subcase - 1],)
    t0 = time.perf_counter()
    raw: list[tuple[PlurigenusData, B5Result]] = []
    refined: dict[WeightedBasket, None] = {}
    per_case = []
    for cfg in configs:
        result = run_scenario(cfg)
        raw.extend(result.raw)
        for wb in result.refined:
            refined.setdefault(wb)
        per_case.append(result.manifest)
    refined_sorted = tuple(sorted(refined, key=WeightedBasket.sort_key))
    manifest = {
        "command": "classify pg1" + (f" --subcase {subcase}" if subcase else ""),
        "engine_version": __version__,
        "subcases": per_case,
        "counts": {"raw": len(raw), "refined": len(refined_sorted)},
        "timing_seconds": round(time.perf_counter() - t0, 3),
    }
    return ClassificationResult(tuple(raw), refined_sorted, manifest)


#: Raw-count scale reported by comparable genus-three searches; the default
#: run records its own count against this order of magnitude.
PG3_RAW_COUNT_SCALE = 500


def default_pg3_config() -> ScenarioConfig:
    """Default genus-three box: chi in {-2,-1}, 6 <= P2 <= 8, caps 14/25/40/63.

    Lower bounds beyond P2 come only from monotonicity (sound for positive
    geometric genus: multiplying by a canonical section injects).  The
    volume floor is 4/3; 3 | r_X applies to final baskets only.
    """
    return ScenarioConfig(
        name="pg3",
        chi_range=(-2, -1),
        p2_range=(6, 8),
        p3_range=(0, 14),
        p4_range=(0, 25),
        p5_range=(0, 40),
        p6_range=(0, 63),
        k3_floor=Fraction(4, 3),
        rx_divisor=3,
        consistency_depth=6,
        integrality_depth=12,
        require_monotone_pm=True,
        tail_r_max=30,
    )


def run_pg3(cfg: ScenarioConfig | None = None) -> ClassificationResult:
    """Genus-three scenario; raw count is compared against the ~500 scale."""
    cfg = cfg or default_pg3_config()
    result = run_scenario(cfg)
    count = result.manifest["counts"]["raw"]
    result.manifest["raw_count_reference"] = {
        "expected_order_of_magnitude": PG3_RAW_COUNT_SCALE,
        "raw": count,
        "ratio": round(count / PG3_RAW_COUNT_SCALE, 3),
        "same_order_of_magnitude": PG3_RAW_COUNT_SCALE / 10
        <= count
        <= PG3_RAW_COUNT_SCALE * 10,
        "note": (
            "exact agreement is not expected; the comparable search's full "
            "filter set is not disclosed, so this manifest records every "
            "active filter for comparability"
        ),
    }
    return result
