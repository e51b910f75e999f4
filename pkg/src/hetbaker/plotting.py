"""Figures and plot-ready data files for experiment reports."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

RC = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": (5.0, 3.2),
    "savefig.dpi": 150,
    "lines.linewidth": 1.2,
}


def write_dat(rows, x: str, y: str, path: Path, where=None):
    """Two whitespace-separated columns, one header comment."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# {x} {y}\n")
        for r in rows:
            if where is None or where(r):
                fh.write(f"{r[x]!r} {r[y]!r}\n")


def growth_figure(report, path: Path):
    rows = [r for r in report.tables["growth"] if r["n"] >= 1]
    m, units = report.params["m"], report.params["units"]
    target = math.log(m + units + 1)
    with plt.rc_context(RC):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7.0, 3.0))
        ax1.plot([r["n"] for r in rows], [r["log_rate"] for r in rows], "o-", ms=3,
                 label="(1/n) log count(n)")
        ax1.axhline(target, color="k", ls="--", lw=0.8, label=f"log {m + units + 1}")
        ax1.set_xlabel("n")
        ax1.legend(frameon=False)
        rr = [r for r in rows if r["n"] >= 2]
        ax2.plot([r["n"] for r in rr], [r["ratio"] for r in rr], "s-", ms=3)
        ax2.axhline(m + units + 1, color="k", ls="--", lw=0.8)
        ax2.set_xlabel("n")
        ax2.set_ylabel("count(n) / count(n-1)")
        fig.suptitle(f"word growth, m={m}, units={units}", fontsize=10)
        fig.tight_layout()
        fig.savefig(path, metadata={"Software": None})
        plt.close(fig)


def convergence_figure(report, path: Path):
    rows = report.tables["convergence"]
    m = report.params["m"]
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        for side in sorted({r["side"] for r in rows}):
            pts = [r for r in rows if r["side"] == side]
            ax.semilogx([r["n"] for r in pts], [r["freq_alpha"] for r in pts], label=side)
        ax.axhline(m / (m + 1), color="k", ls="--", lw=0.8)
        ax.axhline(1 / (m + 1), color="k", ls=":", lw=0.8)
        ax.set_xlabel("n")
        ax.set_ylabel("alpha-group frequency")
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, metadata={"Software": None})
        plt.close(fig)


def render(report, out: Path) -> list[Path]:
    """Write whatever figures and .dat files the report supports; return their paths."""
    written = []
    if "growth" in report.tables:
        p = out / f"{report.name}_rate.dat"
        write_dat(report.tables["growth"], "n", "log_rate", p, where=lambda r: r["n"] >= 1)
        q = out / f"{report.name}_ratio.dat"
        write_dat(report.tables["growth"], "n", "ratio", q, where=lambda r: r["n"] >= 2)
        f = out / f"{report.name}.png"
        growth_figure(report, f)
        written += [p, q, f]
    if "convergence" in report.tables:
        for side in sorted({r["side"] for r in report.tables["convergence"]}):
            p = out / f"{report.name}_freq_{side}.dat"
            write_dat(report.tables["convergence"], "n", "freq_alpha", p,
                      where=lambda r, s=side: r["side"] == s)
            written.append(p)
        f = out / f"{report.name}_convergence.png"
        convergence_figure(report, f)
        written.append(f)
    return written
