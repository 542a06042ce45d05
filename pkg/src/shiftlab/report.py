"""Figure rendering for result tables.

Each table kind gets one PNG with a deterministic filename derived from
the kind, written next to the delimited output by the command line's
report path. Rendering is additive: nothing here feeds back into the
numeric results.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiments import ResultTable


def _col(table: ResultTable, name: str) -> list:
    idx = table.columns.index(name)
    return [row[idx] for row in table.rows]


def _save(fig, out_dir: Path, kind: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{kind}.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _annulus_figure(names, inners, outers, title):
    fig, ax = plt.subplots(figsize=(7, 1.0 + 0.5 * len(names)), constrained_layout=True)
    ys = np.arange(len(names))
    for y, lo, hi in zip(ys, inners, outers):
        ax.plot([lo, hi], [y, y], lw=6, solid_capstyle="butt", color="tab:blue")
        ax.plot([lo, hi], [y, y], "|", color="tab:blue", markersize=14)
    ax.axvline(1.0, color="tab:red", ls="--", lw=1, label="unit circle")
    ax.set_yticks(ys, names)
    ax.set_xscale("log")
    ax.set_xlabel("spectral modulus")
    ax.set_title(title)
    ax.legend(loc="best")
    ax.invert_yaxis()
    return fig


def _render_classify(table: ResultTable, out_dir: Path) -> Path:
    verdict = table.rows[0][table.columns.index("verdict")]
    fig = _annulus_figure(
        [verdict],
        [table.rows[0][table.columns.index("innerRadius")]],
        [table.rows[0][table.columns.index("outerRadius")]],
        "spectrum annulus",
    )
    return _save(fig, out_dir, table.metadata["kind"])


def _render_classify_library(table: ResultTable, out_dir: Path) -> Path:
    labels = [
        f"{name} ({verdict})"
        for name, verdict in zip(_col(table, "name"), _col(table, "verdict"))
    ]
    fig = _annulus_figure(
        labels,
        _col(table, "innerRadius"),
        _col(table, "outerRadius"),
        "classification library",
    )
    return _save(fig, out_dir, table.metadata["kind"])


def _render_spectrum(table: ResultTable, out_dir: Path) -> Path:
    if "innerRadius" in table.columns:
        fig = _annulus_figure(
            ["annulus"],
            _col(table, "innerRadius"),
            _col(table, "outerRadius"),
            "spectrum annulus",
        )
        return _save(fig, out_dir, table.metadata["kind"])
    re = np.array(_col(table, "re"))
    im = np.array(_col(table, "im"))
    fig, ax = plt.subplots(figsize=(5.5, 5.5), constrained_layout=True)
    theta = np.linspace(0, 2 * np.pi, 256)
    ax.plot(np.cos(theta), np.sin(theta), color="tab:red", ls="--", lw=1)
    ax.scatter(re, im, s=25, color="tab:blue", zorder=3)
    ax.set_aspect("equal")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title("eigenvalues and the unit circle")
    return _save(fig, out_dir, table.metadata["kind"])


def _render_orbit(table: ResultTable, out_dir: Path) -> Path:
    ns = np.array(_col(table, "n"))
    norms = np.array(_col(table, "norm"), dtype=float)
    fig, ax = plt.subplots(figsize=(7, 4), constrained_layout=True)
    positive = norms > 0
    ax.semilogy(ns[positive], norms[positive], marker=".", lw=1, color="tab:blue")
    hom = table.metadata.get("homoclinic")
    if hom and hom.get("r") is not None:
        ax.axhline(hom["r"], color="tab:red", ls="--", lw=1, label=f"r = {hom['r']:g}")
        ax.legend(loc="best")
    ax.set_xlabel("n")
    ax.set_ylabel("orbit norm")
    ax.set_title("two-sided orbit norms")
    return _save(fig, out_dir, table.metadata["kind"])


def _render_aluthge(table: ResultTable, out_dir: Path) -> Path:
    ks = np.array(_col(table, "k"))
    gaps = _col(table, "stepGap")
    inner = np.array(_col(table, "innerRadius"), dtype=float)
    outer = np.array(_col(table, "outerRadius"), dtype=float)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4), constrained_layout=True)
    gk = [(k, g) for k, g in zip(ks, gaps) if g is not None and g > 0]
    if gk:
        ax1.semilogy([k for k, _ in gk], [g for _, g in gk], marker="o", lw=1)
    ax1.set_xlabel("iterate k")
    ax1.set_ylabel("step gap")
    ax1.set_title("successive iterate gaps")
    ax2.plot(ks, inner, marker=".", label="inner radius")
    ax2.plot(ks, outer, marker=".", label="outer radius")
    defects = _col(table, "commutatorDefect")
    if any(d is not None for d in defects):
        ax2.plot(ks, [d for d in defects], marker=".", label="normality defect")
    ax2.set_xlabel("iterate k")
    ax2.set_title("spectral radii across iterates")
    ax2.legend(loc="best")
    return _save(fig, out_dir, table.metadata["kind"])


def _render_certificate(table: ResultTable, out_dir: Path) -> Path:
    meta = table.metadata
    cert = meta["certificate"] if "certificate" in meta else meta["report"]["certificate"]
    fig, ax = plt.subplots(figsize=(6, 4), constrained_layout=True)
    ks = [cert["kSmall"], cert["kLarge"]]
    vals = [cert["valueSmall"], cert["valueLarge"]]
    ax.plot(ks, vals, "o-", color="tab:blue", label="probe weight")
    ax.axhline(cert["leftTail"], color="tab:gray", ls=":", label="left tail")
    ax.axhline(cert["rightTail"], color="tab:gray", ls="--", label="right tail")
    ax.set_xlabel("iteration depth k")
    ax.set_ylabel(f"weight at index {cert['probeIndex']}")
    ax.set_title(f"divergence probe, gap = {cert['gap']:.4f}")
    ax.legend(loc="best")
    return _save(fig, out_dir, table.metadata["kind"])


def _render_shadow(table: ResultTable, out_dir: Path) -> Path:
    has_cell = "cell" in table.columns
    fig, ax = plt.subplots(figsize=(7, 4), constrained_layout=True)
    if has_cell:
        cells = _col(table, "cell")
        rows = [r for r, c in zip(table.rows, cells) if c == "driven"]
        sub = ResultTable(table.columns, tuple(rows), table.metadata)
        meta = table.metadata["driven"]
    else:
        sub = table
        meta = table.metadata
    ns = np.array(_col(sub, "n"))
    errs = np.array(
        [e if e is not None else np.nan for e in _col(sub, "errorNorm")], dtype=float
    )
    defs = np.array(
        [d if d is not None else np.nan for d in _col(sub, "defectNorm")], dtype=float
    )
    ax.semilogy(ns, errs, lw=1, color="tab:blue", label="tracking error")
    ax.semilogy(ns, defs, lw=1, color="tab:green", alpha=0.6, label="defect")
    ax.axhline(meta["bound"], color="tab:red", ls="--", lw=1, label="K delta")
    ax.set_xlabel("n")
    ax.set_ylabel("norm")
    ax.set_title("shadowing error against its bound")
    ax.legend(loc="best")
    return _save(fig, out_dir, table.metadata["kind"])


def _render_spectrum_audit(table: ResultTable, out_dir: Path) -> Path:
    trials = np.array(_col(table, "trial"))
    dims = _col(table, "dim")
    step = np.array(_col(table, "stepDrift"), dtype=float)
    acc = np.array(_col(table, "accumulatedDrift"), dtype=float)
    fig, ax = plt.subplots(figsize=(7, 4.5), constrained_layout=True)
    tiny = 1e-18
    ax.semilogy(trials, np.maximum(step, tiny), "o", color="tab:blue",
                label="largest single-step drift")
    ax.semilogy(trials, np.maximum(acc, tiny), "s", color="tab:orange", mfc="none",
                label="drift from start")
    ax.axhline(table.metadata["stepTolerance"], color="tab:blue", ls="--", lw=1)
    ax.axhline(table.metadata["accumulatedTolerance"], color="tab:orange", ls="--", lw=1)
    for t, d in zip(trials, dims):
        ax.annotate(str(d), (t, tiny * 10), fontsize=7, ha="center", color="gray")
    ax.set_xlabel("trial (dimension annotated)")
    ax.set_ylabel("spectral drift")
    ax.set_title("spectrum preservation along dense iteration")
    ax.legend(loc="best")
    return _save(fig, out_dir, table.metadata["kind"])


_RENDERERS = {
    "classify": _render_classify,
    "spectrum": _render_spectrum,
    "orbit": _render_orbit,
    "aluthge": _render_aluthge,
    "certificate": _render_certificate,
    "shadow": _render_shadow,
    "paper-sh-divergence": _render_certificate,
    "paper-hyp-divergence": _render_certificate,
    "paper-spectrum-audit": _render_spectrum_audit,
    "paper-shadow": _render_shadow,
    "paper-classify-library": _render_classify_library,
}


def render_report(table: ResultTable, out_dir) -> list[Path]:
    """Render the figures for a table; returns the written paths."""
    kind = table.metadata.get("kind")
    renderer = _RENDERERS.get(kind)
    if renderer is None:
        return []
    return [renderer(table, Path(out_dir))]
