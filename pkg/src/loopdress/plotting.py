"""Figures for report tables, rendered off-screen to PNG files."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _residual_figure(ax, rows):
    z = np.array([complex(r["z_re"], r["z_im"]) for r in rows])
    flat = np.array([r["flatness"] for r in rows], dtype=float)
    ext = np.array([r["extended"] for r in rows], dtype=float)
    floor = 1e-18
    sc = ax.scatter(z.real, z.imag, c=np.log10(np.maximum(flat, floor)), cmap="viridis", s=60)
    ax.figure.colorbar(sc, ax=ax, label="log10 flatness residual")
    for zi, e in zip(z, ext):
        ax.annotate(f"{e:.0e}", (zi.real, zi.imag), fontsize=6, xytext=(3, 3), textcoords="offset points")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_aspect("equal", adjustable="datalim")


def _rank_figure(ax, rows):
    m = [r["m"] for r in rows]
    rank = [r["rank"] for r in rows]
    ax.step(m, rank, where="mid", marker="o")
    ax.set_xlabel("pole order m")
    ax.set_ylabel("rank r(m)")
    ax.set_xticks(m)


def _series_figure(ax, rows):
    keys = [k for k in rows[0] if k not in ("z_re", "z_im")]
    for k in keys:
        vals = np.array([r[k] for r in rows], dtype=float)
        ax.semilogy(np.maximum(np.abs(vals), 1e-18), marker=".", label=k)
    ax.set_xlabel("row")
    ax.legend()


RENDERERS = {"residuals": _residual_figure, "ranks": _rank_figure, "series": _series_figure}


def render(kind, rows, path, title=""):
    fig, ax = plt.subplots(figsize=(5, 4))
    try:
        RENDERERS.get(kind, _series_figure)(ax, rows)
        ax.set_title(title, fontsize=9)
        fig.tight_layout()
        fig.savefig(path, dpi=100)
    finally:
        plt.close(fig)
    return path
