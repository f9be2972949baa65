"""Numeric birationality-bound calculus: xi refinement and threshold formulas.

The engine manipulates four positive rational invariants of a minimal
3-fold of general type equipped with an m0-canonical fibration: mu (fiber
multiplier), beta (curve-pencil multiplier), xi (canonical degree of the
moving curve class) and the derived test quantity

    alpha(m) = (m - 1 - 1/mu - 1/beta) * xi.

Everything downstream is pure inequality bookkeeping on *lower bounds*:

* seed:        xi >= deg(K_C) / (1 + 1/mu + 1/beta)
* refinement:  whenever alpha(m) > 1,  m*xi >= deg(K_C) + ceil(alpha(m)),
  applied iteratively over a finite m-range until a fixpoint (monotone:
  increasing xi only increases alpha, so each round stays sound);
* quantization: r_X * xi is an integer, so xi rounds up to the grid 1/r_X;
* birationality: the m-canonical map is birational -- under geometric side
  conditions this engine records as assumptions but never checks -- once
  alpha(m) > 2, m >= m0 + 2, and m clears a curve-separation threshold.

All arithmetic is exact; the only rounding is the ceil/floor the formulas
themselves prescribe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import NamedTuple, Sequence

from .basket import BasketError

RationalLike = Fraction | int


def _frac(x: RationalLike, name: str, positive: bool = True) -> Fraction:
    value = Fraction(x)
    if positive and value <= 0:
        raise BasketError(f"{name} must be positive, got {value}")
    return value


@dataclass(frozen=True)
class RefinementState:
    """Lower-bound state for the xi/alpha engine.

    deg_kc is deg(K_C) = 2g(C) - 2 of the moving curve (2 for genus two,
    4 for genus three, ...).  rx, when known, is the Cartier index used for
    quantization.  zeta and m1 feed the curve-separation threshold: the
    restricted systems separate curves for m > m0/zeta + m1 + 1, with m1
    defaulting to m0 (the curve pencil cut out by the m0-canonical system
    itself) and zeta to 1.
    """

    m0: int
    mu: Fraction
    beta: Fraction
    xi: Fraction
    deg_kc: int = 2
    rx: int | None = None
    zeta: Fraction = Fraction(1)
    m1: int | None = None

    def __post_init__(self) -> None:
        if not (isinstance(self.m0, int) and self.m0 >= 1):
            raise BasketError(f"m0 must be a positive integer, got {self.m0!r}")
        object.__setattr__(self, "mu", _frac(self.mu, "mu"))
        object.__setattr__(self, "beta", _frac(self.beta, "beta"))
        object.__setattr__(self, "xi", _frac(self.xi, "xi"))
        object.__setattr__(self, "zeta", _frac(self.zeta, "zeta"))
        if not (isinstance(self.deg_kc, int) and self.deg_kc >= 2 and self.deg_kc % 2 == 0):
            raise BasketError(f"deg_kc must be an even integer >= 2, got {self.deg_kc!r}")
        if self.rx is not None and not (isinstance(self.rx, int) and self.rx >= 1):
            raise BasketError(f"rx must be a positive integer, got {self.rx!r}")
        if self.m1 is not None and not (isinstance(self.m1, int) and self.m1 >= 1):
            raise BasketError(f"m1 must be a positive integer, got {self.m1!r}")


def initial_xi(deg_kc: int, mu: RationalLike, beta: RationalLike) -> Fraction:
    """Seed bound xi >= deg(K_C) / (1 + 1/mu + 1/beta)."""
    return Fraction(deg_kc) / (1 + 1 / _frac(mu, "mu") + 1 / _frac(beta, "beta"))


def alpha(m: int, s: RefinementState) -> Fraction:
    """(m - 1 - 1/mu - 1/beta) * xi; may be <= 0 for small m."""
    return (m - 1 - 1 / s.mu - 1 / s.beta) * s.xi


def quantize_up(q: RationalLike, r: int) -> Fraction:
    """Least rational >= q whose denominator divides r: ceil(q*r)/r."""
    value = _frac(q, "q")
    if not (isinstance(r, int) and r >= 1):
        raise BasketError(f"r must be a positive integer, got {r!r}")
    return Fraction(math.ceil(value * r), r)


class RefineStep(NamedTuple):
    """One transcript line: the rule applied, the m used, old and new bound."""

    round: int
    rule: str  # "alpha-ceiling" or "index-quantization"
    m: int | None
    old: Fraction
    new: Fraction


@dataclass(frozen=True)
class RefineResult:
    state: RefinementState
    steps: tuple[RefineStep, ...]
    capped: bool  # True when the round limit stopped iteration before the fixpoint


def refine_xi(
    s: RefinementState,
    m_range: tuple[int, int] = (2, 60),
    max_rounds: int | None = 100,
) -> RefineResult:
    """Iterate the alpha-ceiling update (plus index quantization) to a fixpoint.

    Each round takes the best improvement  xi <- (deg_kc + ceil(alpha(m)))/m
    over the m in range with alpha(m) > 1 (smallest such m on ties), then
    rounds xi up to the 1/rx grid when rx is known.  The update is monotone
    non-decreasing and lands on a discrete grid, so it terminates; the
    round cap is a belt-and-braces guard and is reported when hit.
    """
    lo, hi = m_range
    if lo > hi:
        raise BasketError(f"empty m-range {m_range}")
    steps: list[RefineStep] = []
    state = s
    if state.rx is not None:
        snapped = quantize_up(state.xi, state.rx)
        if snapped > state.xi:
            steps.append(RefineStep(0, "index-quantization", None, state.xi, snapped))
            state = replace(state, xi=snapped)
    rounds = 0
    while True:
        if max_rounds is not None and rounds >= max_rounds:
            return RefineResult(state, tuple(steps), capped=True)
        rounds += 1
        best: Fraction | None = None
        best_m: int | None = None
        for m in range(lo, hi + 1):
            a = alpha(m, state)
            if a <= 1:
                continue
            candidate = Fraction(state.deg_kc + math.ceil(a), m)
            if best is None or candidate > best:
                best, best_m = candidate, m
        improved = False
        if best is not None and best > state.xi:
            steps.append(RefineStep(rounds, "alpha-ceiling", best_m, state.xi, best))
            state = replace(state, xi=best)
            improved = True
        if state.rx is not None:
            snapped = quantize_up(state.xi, state.rx)
            if snapped > state.xi:
                steps.append(
                    RefineStep(rounds, "index-quantization", None, state.xi, snapped)
                )
                state = replace(state, xi=snapped)
                improved = True
        if not improved:
            return RefineResult(state, tuple(steps), capped=False)


def separation_threshold(s: RefinementState) -> Fraction:
    """Curve-separation threshold: m must exceed this for the level certificate.

    Two sufficient conditions exist; the engine takes the weaker (smaller)
    one and reports both as assumptions:

      (a) m > 1/mu + 2/beta + 1,
      (b) m > m0/zeta + m1 + 1   (m1 defaults to m0).
    """
    m1 = s.m1 if s.m1 is not None else s.m0
    return min(1 / s.mu + 2 / s.beta + 1, Fraction(s.m0) / s.zeta + m1 + 1)


def birational_level(s: RefinementState, m_cap: int = 10000) -> int:
    """Least m with alpha(m) > 2, m >= m0 + 2, and m past the separation threshold.

    The returned m certifies birationality of the m-canonical map *under
    the geometric side conditions* (the linear systems must separate
    fibers and curves); the engine asserts only the arithmetic.
    alpha grows linearly in m, so the level always exists.
    """
    threshold = separation_threshold(s)
    m = max(2, s.m0 + 2)
    while m <= m_cap:
        if alpha(m, s) > 2 and m > threshold:
            return m
        m += 1
    raise BasketError(f"no birational level found below {m_cap}")


def level_assumptions(s: RefinementState) -> tuple[str, ...]:
    """Named geometric assumptions under which birational_level certifies."""
    m1 = s.m1 if s.m1 is not None else s.m0
    return (
        f"m-canonical systems separate the m0-canonical fibration members for m >= {s.m0 + 2}",
        "restricted systems separate the curve pencil for m > "
        f"min(1/mu + 2/beta + 1, m0/zeta + m1 + 1) = {separation_threshold(s)} "
        f"(zeta = {s.zeta}, m1 = {m1})",
        "alpha(m) > 2 at the returned level",
    )


def k3_lower(s: RefinementState) -> Fraction:
    """Volume bound K^3 >= mu * beta * xi / m0."""
    return s.mu * s.beta * s.xi / s.m0


def kawamata_ratio(zeta: RationalLike, m0: int) -> Fraction:
    """Extension-theorem ratio zeta/(m0 + zeta) comparing pullback to K of the fiber."""
    z = _frac(zeta, "zeta")
    return z / (m0 + z)


def k1_ratio(n1: int, j1: int, l1: int) -> Fraction:
    """Pullback ratio (l1 + j1)/(n1 + j1) from a base-point-free splitting."""
    for name, value in (("n1", n1), ("j1", j1), ("l1", l1)):
        if not (isinstance(value, int) and value >= 1):
            raise BasketError(f"{name} must be a positive integer, got {value!r}")
    return Fraction(l1 + j1, n1 + j1)


class X1Update(NamedTuple):
    xi: Fraction
    applied: bool  # False when the n*xi > 1 gate failed (value unchanged)


def x1_update(m1: int, n: int, xi_lb: RationalLike) -> X1Update:
    """Same-pencil refinement: (n + m1 + 1) xi >= ceil(n xi) + 2 when n*xi > 1.

    Returns max(xi, (ceil(n*xi) + 2)/(n + m1 + 1), 2/(m1 + 1)); a no-op
    marker when the gate n*xi > 1 fails.
    """
    xi = _frac(xi_lb, "xi")
    if n * xi <= 1:
        return X1Update(xi, applied=False)
    candidate = Fraction(math.ceil(n * xi) + 2, n + m1 + 1)
    floor = Fraction(2, m1 + 1)
    return X1Update(max(xi, candidate, floor), applied=True)


def x1_update_nonpencil(
    m1: int,
    n: int,
    xi_lb: RationalLike,
    beta: RationalLike,
    delta: int,
    restricted_big: bool = False,
) -> X1Update:
    """Distinct-pencil refinement: (n+1) xi >= 2 + delta + ceil((n - m1 - 1/beta) xi).

    Valid for n > m1 + 1/beta (weak inequality when the restricted divisor
    is big).  No golden value pins this rule; it is property-tested only.
    """
    xi = _frac(xi_lb, "xi")
    b = _frac(beta, "beta")
    gate = n - m1 - 1 / b
    if gate < 0 or (gate == 0 and not restricted_big):
        return X1Update(xi, applied=False)
    candidate = Fraction(2 + delta + math.ceil(gate * xi), n + 1)
    return X1Update(max(xi, candidate), applied=True)


class X1Level(NamedTuple):
    n: int
    level: int  # n + m1 + 1


def x1_birational_n(m1: int, m2: int, xi_lb: RationalLike) -> X1Level:
    """Least n with n*xi > 2 and n >= m2 - m1; certifies level n + m1 + 1."""
    xi = _frac(xi_lb, "xi")
    n = max(1, m2 - m1)
    while n * xi <= 2:
        n += 1
    return X1Level(n, n + m1 + 1)


def x2_threshold(
    mu: RationalLike,
    beta: RationalLike,
    xi: RationalLike,
    m1: int,
    m2: int,
    j: int,
    delta1: int,
) -> int:
    """Birational level from a split restriction M_{m1}|_F >= j*C + C1.

    delta1 = (C1 . C) selects the case: for delta1 <= 2j the level is

        n + 1,  n = max(m2, floor((2 - delta1/j)/xi + 1/mu + m1/j) + 1),

    and for delta1 > 2j

        n + 1,  n = max(m2, floor(1/mu + 2*m1/delta1 + (1 - 2j/delta1)/beta) + 1).
    """
    mu_f = _frac(mu, "mu")
    beta_f = _frac(beta, "beta")
    xi_f = _frac(xi, "xi")
    if not (isinstance(j, int) and j >= 1):
        raise BasketError(f"j must be a positive integer, got {j!r}")
    if delta1 < 1:
        raise BasketError(f"delta1 must be positive, got {delta1!r}")
    if delta1 <= 2 * j:
        expr = (2 - Fraction(delta1, j)) / xi_f + 1 / mu_f + Fraction(m1, j)
    else:
        expr = 1 / mu_f + Fraction(2 * m1, delta1) + (1 - Fraction(2 * j, delta1)) / beta_f
    n = max(m2, math.floor(expr) + 1)
    return n + 1


def surface_pm_12(m: int) -> int:
    """Plurigenus m(m-1)/2 + 3 of a surface with K^2 = 1, p_g = 2 (m >= 2)."""
    if not (isinstance(m, int) and m >= 2):
        raise BasketError(f"surface_pm_12 needs an integer m >= 2, got {m!r}")
    return m * (m - 1) // 2 + 3
