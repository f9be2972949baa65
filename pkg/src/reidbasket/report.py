"""Report rendering: delimited output plus matplotlib figures on disk.

The engine itself never touches floats; figures are presentation only, so
rationals are converted at the very last step.  Each helper writes its
CSV/PNG files into the requested directory and returns the paths.
"""

from __future__ import annotations

import os
from fractions import Fraction

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .basket import WeightedBasket, cartier_index, k3
from .jsonio import frac_to_str
from .packing import DescendantFilter, descendants, packing_closure


def _ensure_dir(outdir: str) -> None:
    os.makedirs(outdir, exist_ok=True)


def _write_csv(path: str, header: str, rows: list[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


def _basket_rows(baskets) -> list[str]:
    return [
        f"\"{wb.basket}\",{wb.p2},{wb.chi},{frac_to_str(k3(wb))},{cartier_index(wb.basket)}"
        for wb in baskets
    ]


def save_classification_report(result, outdir: str) -> list[str]:
    """CSV of raw/refined candidates plus a K^3 distribution figure."""
    _ensure_dir(outdir)
    paths = []

    refined_csv = os.path.join(outdir, "refined.csv")
    _write_csv(refined_csv, "basket,p2,chi,k3,r_x", _basket_rows(result.refined))
    paths.append(refined_csv)

    raw_csv = os.path.join(outdir, "raw.csv")
    _write_csv(
        raw_csv,
        "chi,p2,p3,p4,p5,p6,sigma5,basket,k3",
        [
            f"{d.chi},{d.p2},{d.p3},{d.p4},{d.p5},{d.p6},{d.sigma5},"
            f"\"{r.basket}\",{frac_to_str(r.k3)}"
            for d, r in result.raw
        ],
    )
    paths.append(raw_csv)

    raw_k3 = [float(r.k3) for _, r in result.raw]
    ref_k3 = [float(k3(wb)) for wb in result.refined]
    fig, ax = plt.subplots(figsize=(8, 5))
    if raw_k3:
        ax.hist(raw_k3, bins=40, alpha=0.6, label=f"raw ({len(raw_k3)})")
    if ref_k3:
        ax.hist(ref_k3, bins=40, alpha=0.6, label=f"refined ({len(ref_k3)})")
    ax.set_xlabel("canonical volume $K^3$")
    ax.set_ylabel("candidates")
    ax.set_title(result.manifest.get("command", "classification"))
    ax.legend()
    fig.tight_layout()
    fig_path = os.path.join(outdir, "k3_distribution.png")
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)
    paths.append(fig_path)
    return paths


def save_packing_report(
    wb: WeightedBasket,
    filt: DescendantFilter,
    outdir: str,
    max_depth: int | None = None,
) -> list[str]:
    """CSV of kept descendants plus a layered drawing of the packing DAG."""
    _ensure_dir(outdir)
    paths = []

    kept = descendants(wb, filt, max_depth=max_depth)
    kept_csv = os.path.join(outdir, "descendants.csv")
    _write_csv(kept_csv, "basket,p2,chi,k3,r_x", _basket_rows(kept))
    paths.append(kept_csv)

    # Layered layout: x = packing depth (each step removes one basket entry,
    # so total multiplicity is a depth function), y = rank within the layer.
    nodes = []
    edges = []
    for node, parent, step in packing_closure(wb, filt.k3_floor, max_depth):
        nodes.append(node)
        if parent is not None:
            edges.append((parent, node, step))
    root_size = wb.basket.size()
    layers: dict[int, list[WeightedBasket]] = {}
    for node in nodes:
        layers.setdefault(root_size - node.basket.size(), []).append(node)
    pos = {}
    for depth, members in sorted(layers.items()):
        members.sort(key=WeightedBasket.sort_key)
        for i, node in enumerate(members):
            pos[node.basket] = (depth, i - (len(members) - 1) / 2)

    kept_set = {node.basket for node in kept}
    fig, ax = plt.subplots(figsize=(max(6, 2.5 * (len(layers) + 1)), max(4, 0.9 * max(len(v) for v in layers.values()) + 1)))
    for parent, child, _ in edges:
        (x0, y0), (x1, y1) = pos[parent.basket], pos[child.basket]
        ax.annotate(
            "",
            xy=(x1, y1),
            xytext=(x0, y0),
            arrowprops=dict(arrowstyle="->", color="0.5", lw=0.8),
        )
    for node in nodes:
        x, y = pos[node.basket]
        color = "tab:green" if node.basket in kept_set else "tab:gray"
        ax.plot([x], [y], "o", color=color, markersize=6)
        ax.annotate(
            f"{node.basket or '(empty)'}\n$K^3$ = {frac_to_str(k3(node))}",
            xy=(x, y),
            xytext=(0, 7),
            textcoords="offset points",
            ha="center",
            fontsize=7,
        )
    ax.set_xlabel("packing steps")
    ax.set_yticks([])
    ax.set_title(f"packing closure of {wb.basket or '(empty)'}")
    ax.margins(0.15)
    fig.tight_layout()
    fig_path = os.path.join(outdir, "packing_dag.png")
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)
    paths.append(fig_path)
    return paths
