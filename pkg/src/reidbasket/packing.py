"""Prime packings of baskets and the filtered descendant search.

A *prime packing* replaces two basket entries (b1, r1), (b2, r2) with
|b1*r2 - b2*r1| = 1 (Farey-adjacent slopes) by their mediant
(b1+b2, r1+r2).  The determinant condition guarantees the mediant is again
coprime and normalized, and it makes the canonical volume drop by exactly

    b1^2/r1 + b2^2/r2 - (b1+b2)^2/(r1+r2)  >  0,

strictly (Cauchy-Schwarz, with equality impossible at determinant +-1).
Two copies of the same pair never pack (determinant 0).

The descendant search explores the packing closure of a weighted basket.
Because K^3 only decreases along packings, a volume floor may prune whole
subtrees; every other filter is a retention predicate only -- a node that
fails it is dropped from the result but its children are still explored
(chi_m-consistency is not monotone along packings).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator

from .basket import Basket, BasketError, Pair, WeightedBasket, cartier_index, k3, plurigenus


@dataclass(frozen=True)
class PackingStep:
    """One prime packing: `left` and `right` merged into their mediant."""

    left: Pair
    right: Pair
    merged: Pair

    def __str__(self) -> str:
        return f"{self.left}+{self.right}->{self.merged}"


def mediant(p: Pair, q: Pair) -> Pair | None:
    """The merged pair (b1+b2, r1+r2) when the two are Farey-adjacent, else None."""
    det = p.b * q.r - q.b * p.r
    if det not in (1, -1):
        return None
    return Pair(p.r + q.r, p.b + q.b)


def k3_drop(p: Pair, q: Pair) -> Fraction:
    """Exact decrease of K^3 caused by packing p and q."""
    return (
        Fraction(p.b * p.b, p.r)
        + Fraction(q.b * q.b, q.r)
        - Fraction((p.b + q.b) ** 2, p.r + q.r)
    )


@lru_cache(maxsize=None)
def one_step_packings(basket: Basket) -> tuple[tuple[PackingStep, Basket], ...]:
    """All one-step packings, deduplicated by the resulting basket.

    A step may combine two copies of distinct pairs; combining two copies of
    the same pair is impossible (determinant 0), so only distinct entry keys
    are scanned.  Results are sorted canonically by the child basket.
    """
    keys = [pair for pair, _ in basket.entries]
    children: dict[Basket, PackingStep] = {}
    for i in range(len(keys)):
        for j in range(i + 1, len(keys)):
            merged = mediant(keys[i], keys[j])
            if merged is None:
                continue
            step = PackingStep(keys[i], keys[j], merged)
            child = basket.replace((keys[i], keys[j]), (merged,))
            children.setdefault(child, step)
    return tuple(
        sorted(((step, child) for child, step in children.items()),
               key=lambda item: item[1].entries)
    )


@dataclass(frozen=True)
class DescendantFilter:
    """Retention filters for the packing closure; every field is optional.

    k3_floor       -- keep (and, legitimately, prune below) K^3 >= floor
    preserve_pm_upto -- require chi_m unchanged from the root for 3 <= m <= M
    rx_divisor     -- require d | r_X of the node
    integrality_upto -- require chi_m integral for 2 <= m <= depth
    """

    k3_floor: Fraction | None = None
    preserve_pm_upto: int | None = None
    rx_divisor: int | None = None
    integrality_upto: int | None = None


def packing_closure(
    wb: WeightedBasket,
    k3_floor: Fraction | None = None,
    max_depth: int | None = None,
    order: str = "bfs",
) -> Iterator[tuple[WeightedBasket, WeightedBasket | None, PackingStep | None]]:
    """Yield (node, parent, step) over the packing closure of `wb`.

    Nodes with K^3 below `k3_floor` are neither yielded nor expanded; this
    pruning is sound because the volume is strictly decreasing along
    packings.  `order` picks the traversal ('bfs' or 'dfs'); the closure as
    a set is independent of it, which the test suite checks.
    """
    if order not in ("bfs", "dfs"):
        raise BasketError(f"unknown traversal order {order!r}")
    root_ok = k3_floor is None or k3(wb) >= k3_floor
    if not root_ok:
        return
    seen = {wb.basket}
    frontier: deque = deque([(wb, None, None, 0)])
    while frontier:
        node, parent, step, depth = (
            frontier.popleft() if order == "bfs" else frontier.pop()
        )
        yield node, parent, step
        if max_depth is not None and depth >= max_depth:
            continue
        for child_step, child_basket in one_step_packings(node.basket):
            if child_basket in seen:
                continue
            child = WeightedBasket(child_basket, node.p2, node.chi)
            if k3_floor is not None and k3(child) < k3_floor:
                continue
            seen.add(child_basket)
            frontier.append((child, node, child_step, depth + 1))


def _passes(wb: WeightedBasket, root: WeightedBasket, filt: DescendantFilter) -> bool:
    if filt.k3_floor is not None and k3(wb) < filt.k3_floor:
        return False
    if filt.preserve_pm_upto is not None:
        for m in range(3, filt.preserve_pm_upto + 1):
            if plurigenus(wb, m) != plurigenus(root, m):
                return False
    if filt.rx_divisor is not None and cartier_index(wb.basket) % filt.rx_divisor != 0:
        return False
    if filt.integrality_upto is not None:
        for m in range(2, filt.integrality_upto + 1):
            if plurigenus(wb, m).denominator != 1:
                return False
    return True


def descendants(
    wb: WeightedBasket,
    filt: DescendantFilter = DescendantFilter(),
    max_depth: int | None = None,
    order: str = "bfs",
) -> tuple[WeightedBasket, ...]:
    """All baskets reachable by 0 or more packings that pass every filter.

    P_2 and chi are held fixed.  The K^3 floor prunes subtrees; the other
    filters only decide retention, so a failing node's children are still
    explored.  Output is canonically sorted and deterministic.
    """
    kept = [
        node
        for node, _, _ in packing_closure(wb, filt.k3_floor, max_depth, order)
        if _passes(node, wb, filt)
    ]
    return tuple(sorted(kept, key=WeightedBasket.sort_key))


def packing_dag(
    wb: WeightedBasket,
    k3_floor: Fraction | None = None,
    max_depth: int | None = None,
) -> tuple[list[WeightedBasket], list[tuple[WeightedBasket, WeightedBasket, PackingStep]]]:
    """Nodes and parent->child edges of the pruned closure (for DOT/figures).

    Only tree edges discovered by the traversal are listed, one per node.
    """
    nodes: list[WeightedBasket] = []
    edges: list[tuple[WeightedBasket, WeightedBasket, PackingStep]] = []
    for node, parent, step in packing_closure(wb, k3_floor, max_depth):
        nodes.append(node)
        if parent is not None and step is not None:
            edges.append((parent, node, step))
    return nodes, edges


def to_dot(
    wb: WeightedBasket,
    k3_floor: Fraction | None = None,
    max_depth: int | None = None,
) -> str:
    """Graphviz DOT text of the packing DAG with K^3 node labels."""
    nodes, edges = packing_dag(wb, k3_floor, max_depth)
    ids = {node.basket: f"n{i}" for i, node in enumerate(nodes)}
    lines = ["digraph packings {", '  node [shape=box, fontname="monospace"];']
    for node in nodes:
        label = f"{node.basket or '(empty)'}\\nK^3 = {k3(node)}"
        lines.append(f'  {ids[node.basket]} [label="{label}"];')
    for parent, child, step in edges:
        lines.append(
            f'  {ids[parent.basket]} -> {ids[child.basket]} [label="{step}"];'
        )
    lines.append("}")
    return "\n".join(lines)
