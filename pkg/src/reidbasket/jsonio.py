"""JSON encoding of engine objects with bit-exact rationals.

Rationals are serialized as strings "p/q" in lowest terms ("p" alone when
the denominator is 1), never as JSON numbers, so exactness survives any
consumer.  Every structure written here re-parses to identical in-memory
values; `diff` and the manifest-replay guarantee rely on that.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Mapping

from .b5 import B5Coefficients, B5Result, PlurigenusData
from .basket import Basket, BasketError, WeightedBasket, cartier_index, k3
from .bounds import RefineStep


def frac_to_str(x: Fraction | int) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def str_to_frac(text: str | int) -> Fraction:
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise BasketError(f"cannot parse rational {text!r}: {exc}") from None


def weighted_to_dict(wb: WeightedBasket) -> dict[str, Any]:
    return {
        "basket": str(wb.basket),
        "p2": wb.p2,
        "chi": wb.chi,
        "k3": frac_to_str(k3(wb)),
        "r_x": cartier_index(wb.basket),
    }


def weighted_from_dict(obj: Mapping[str, Any]) -> WeightedBasket:
    wb = WeightedBasket(Basket.parse(obj["basket"]), int(obj["p2"]), int(obj["chi"]))
    if "k3" in obj and str_to_frac(obj["k3"]) != k3(wb):
        raise BasketError(
            f"stored K^3 = {obj['k3']} disagrees with recomputed {frac_to_str(k3(wb))}"
        )
    return wb


def raw_candidate_to_dict(data: PlurigenusData, res: B5Result) -> dict[str, Any]:
    return {
        "chi": data.chi,
        "p": list(data.p),
        "sigma5": data.sigma5,
        "tail": [[r, mult] for r, mult in data.tail],
        "coefficients": list(res.coefficients),
        "basket": str(res.basket),
        "k3": frac_to_str(res.k3),
    }


def raw_candidate_from_dict(obj: Mapping[str, Any]) -> tuple[PlurigenusData, B5Result]:
    data = PlurigenusData(
        int(obj["chi"]),
        *(int(v) for v in obj["p"]),
        sigma5=int(obj["sigma5"]),
        tail=tuple((int(r), int(m)) for r, m in obj["tail"]),
    )
    res = B5Result(
        basket=Basket.parse(obj["basket"]),
        coefficients=B5Coefficients(*(int(c) for c in obj["coefficients"])),
        k3=str_to_frac(obj["k3"]),
    )
    return data, res


def classification_to_dict(result) -> dict[str, Any]:
    return {
        "manifest": result.manifest,
        "raw": [raw_candidate_to_dict(d, r) for d, r in result.raw],
        "refined": [weighted_to_dict(wb) for wb in result.refined],
    }


def refine_step_to_dict(step: RefineStep) -> dict[str, Any]:
    return {
        "round": step.round,
        "rule": step.rule,
        "m": step.m,
        "old": frac_to_str(step.old),
        "new": frac_to_str(step.new),
    }


def dumps(obj: Any) -> str:
    """Deterministic JSON text (sorted keys, stable separators)."""
    return json.dumps(obj, indent=2, sort_keys=True)


def dump_file(obj: Any, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))
        fh.write("\n")


def load_file(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
