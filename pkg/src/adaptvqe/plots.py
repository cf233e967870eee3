"""Static SVG panels drawn from the scan CSVs."""
from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_SVG_META = {"Date": None}


def _read(path: Path) -> list[dict]:
    if not path.exists():
        return []
    with path.open() as f:
        return list(csv.DictReader(f))


def _save(fig, path: Path) -> None:
    fig.tight_layout()
    # fixed salt keeps element ids, and so the file bytes, reproducible
    with plt.rc_context({"svg.hashsalt": "adaptvqe"}):
        fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def _series(rows, key, value):
    out = defaultdict(list)
    for r in rows:
        out[r[key]].append((float(r["coordinate"]), float(r[value])))
    return {k: sorted(v) for k, v in out.items()}


def plot_scan(outdir, xlabel: str = "coordinate", title: str = "") -> list[Path]:
    """Energy curves, <S^2> track, |mu|^2 curves and ansatz sizes; returns written files."""
    outdir = Path(outdir)
    pdir = outdir / "plots"
    pdir.mkdir(parents=True, exist_ok=True)
    written = []
    curves = _read(outdir / "curves.csv")

    fig, ax = plt.subplots(figsize=(6, 4.5))
    for state, pts in _series(curves, "state", "energy").items():
        ax.plot(*zip(*pts), "o", ms=4, label=f"state {state}")
    fci = defaultdict(list)
    for r in curves:
        if r["fci_index"] not in ("", "-1"):
            fci[r["fci_index"]].append((float(r["coordinate"]), float(r["fci_energy"])))
    for pts in fci.values():
        ax.plot(*zip(*sorted(set(pts))), "k--", lw=0.8)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("energy / hartree")
    ax.set_title(title)
    if curves:
        ax.legend(fontsize=7)
    _save(fig, pdir / "energies.svg")
    written.append(pdir / "energies.svg")

    fig, ax = plt.subplots(figsize=(6, 2.5))
    for state, pts in _series(curves, "state", "s2").items():
        ax.plot(*zip(*pts), "o-", ms=3, lw=0.8, label=f"state {state}")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("<S^2>")
    _save(fig, pdir / "s2.svg")
    written.append(pdir / "s2.svg")

    props = [r for r in _read(outdir / "properties.csv") if r["i"] != r["j"]]
    if props:
        fig, ax = plt.subplots(figsize=(6, 4))
        pairs = defaultdict(list)
        for r in props:
            if r["i"] == "0":
                pairs[f"0-{r['j']}"].append((float(r["coordinate"]), max(float(r["mu2_total"]), 1e-16)))
        for name, pts in pairs.items():
            ax.semilogy(*zip(*sorted(pts)), "o-", ms=3, lw=0.8, label=name)
        ax.set_xlabel(xlabel)
        ax.set_ylabel("|mu|^2 / D^2")
        ax.legend(fontsize=7)
        _save(fig, pdir / "dipoles.svg")
        written.append(pdir / "dipoles.svg")

    summary = _read(outdir / "summary.csv")
    fig, ax = plt.subplots(figsize=(6, 3))
    if summary:
        x = [float(r["coordinate"]) for r in summary]
        ax.plot(x, [int(r["total_ops"]) for r in summary], "o-", label="operators")
        ax.plot(x, [int(r["distinct_ops"]) for r in summary], "s-", label="distinct operators")
        ax.plot(x, [int(r["bound"]) for r in summary], "k--", label="sum of sector sizes")
        ax.legend(fontsize=7)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    _save(fig, pdir / "ansatz.svg")
    written.append(pdir / "ansatz.svg")
    return written
