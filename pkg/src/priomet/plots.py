"""Figures for bench runs (PNG files written next to the CSV table)."""
from __future__ import annotations

from pathlib import Path


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def support_profiles(rows: list[dict], path, title: str) -> Path:
    """Per-rank support (or label words) curves, one line per (scheme, n)."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for row in rows:
        prof = [int(x) for x in str(row["profile"]).split(";") if x != ""]
        if not prof:
            continue
        ax.plot(range(1, len(prof) + 1), prof, lw=1, label=f"{row['scheme']} n={row['n']}")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("priority rank j")
    ax.set_ylabel("support / words")
    ax.set_title(title)
    ax.legend(fontsize=7, loc="upper left")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def width_vs_n(rows: list[dict], path, title: str) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    by_scheme: dict[str, list] = {}
    for row in rows:
        by_scheme.setdefault(row["scheme"], []).append((int(row["n"]), int(row["max_dim"])))
    for scheme, pts in sorted(by_scheme.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=scheme)
    ax.set_xscale("log", base=2)
    ax.set_xlabel("n")
    ax.set_ylabel("columns")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
