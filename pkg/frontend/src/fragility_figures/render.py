"""Render line plots and heat maps from fisher-fragility CSV outputs.

Every plotted number comes verbatim from an input CSV; the renderer performs
no physics computation of its own.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schemas import FIGURE_SCHEMAS, SchemaError, read_table


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    csv_paths: tuple
    out_path: str

    def __post_init__(self):
        if self.figure_id not in FIGURE_SCHEMAS:
            raise SchemaError(
                f"unknown figure id {self.figure_id!r}; expected one of "
                f"{', '.join(sorted(FIGURE_SCHEMAS))}")
        if not self.csv_paths:
            raise SchemaError("at least one input CSV is required")


def _save(fig, out_path: str) -> None:
    fig.savefig(out_path, dpi=150, metadata={"Software": None})
    plt.close(fig)


def _render_sweeps(tables, labels, out_path, xlabel):
    n = len(tables)
    fig, axes = plt.subplots(1, n, figsize=(4.5 * n, 3.4), squeeze=False,
                             sharey=False)
    for ax, table, label in zip(axes[0], tables, labels):
        ax.plot(table["beta"], table["cfi"], lw=1.0, label="CFI")
        ax.plot(table["beta"], table["qfi"], ls="--", lw=1.0, label="QFI")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(r"$F$")
        ax.set_title(label)
        ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, out_path)


def _render_sweep_overlay(tables, labels, out_path):
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    for table, label in zip(tables, labels):
        ax.plot(table["beta"], table["cfi"], lw=1.0, label=label)
    ax.plot(tables[0]["beta"], tables[0]["qfi"], ls="--", lw=1.0,
            color="black", label="QFI")
    ax.set_xlabel(r"$\beta$")
    ax.set_ylabel(r"$F_C$")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, out_path)


def _render_jensen(tables, labels, out_path):
    n = len(tables)
    fig, axes = plt.subplots(2, n, figsize=(4.5 * n, 5.6), squeeze=False)
    for col, (table, label) in enumerate(zip(tables, labels)):
        top, bottom = axes[0][col], axes[1][col]
        top.plot(table["beta"], table["cfi"], lw=1.0, label="CFI")
        top.plot(table["beta"], table["jensen_bound"], lw=1.0, ls="--",
                 label=r"$\bar F_c$")
        top.set_ylabel(r"$F$")
        top.set_title(label)
        top.legend(fontsize=8)
        bottom.plot(table["beta"], table["fragile_trace"], lw=1.0,
                    label="fragile trace")
        bottom.plot(table["beta"], table["residual_trace"], lw=1.0, ls=":",
                    label="residual trace")
        bottom.set_xlabel(r"$\beta$")
        bottom.set_ylabel("weight")
        bottom.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, out_path)


def _render_sphere(table, out_path):
    thetas = np.array(table["theta_n"])
    phis = np.array(table["phi_n"])
    cfi = np.array(table["cfi"])
    t_vals = np.unique(thetas)
    p_vals = np.unique(phis)
    if len(t_vals) * len(p_vals) != len(cfi):
        raise SchemaError("sphere-scan rows do not form a full "
                          f"{len(t_vals)}x{len(p_vals)} grid")
    order = np.lexsort((phis, thetas))
    grid = cfi[order].reshape(len(t_vals), len(p_vals))
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    mesh = ax.pcolormesh(p_vals, t_vals, grid, shading="nearest")
    fig.colorbar(mesh, ax=ax, label=r"$F_C$")
    ax.set_xlabel(r"$\phi_n$")
    ax.set_ylabel(r"$\theta_n$")
    fig.tight_layout()
    _save(fig, out_path)
    return grid


def _render_bosonic(tables, labels, out_path):
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    for table, label in zip(tables, labels):
        ax.plot(table["alpha"], table["cfi"], lw=1.0, label=label)
    ax.set_xlabel(r"$\alpha$")
    ax.set_ylabel(r"$F_C$")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, out_path)


def _render_mle_bias(table, out_path):
    betas = sorted(set(table["beta"]))
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    for beta in betas:
        idx = [i for i, b in enumerate(table["beta"]) if b == beta]
        x = [table["theta0"][i] for i in idx]
        y = [table["mean_bias"][i] for i in idx]
        err = [table["sem"][i] for i in idx]
        ax.errorbar(x, y, yerr=err, lw=1.0, capsize=2,
                    label=rf"$\beta$ = {beta:g}")
    ax.set_xlabel(r"$\theta_0$")
    ax.set_ylabel("mean bias")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, out_path)


def render(spec: FigureSpec) -> dict:
    """Render one figure; returns the column tables actually plotted.

    The returned mapping {csv path: {column: values}} carries the numbers
    verbatim, so callers can verify that the plot reflects the inputs.
    """
    schema = FIGURE_SCHEMAS[spec.figure_id]
    tables = [read_table(p, schema) for p in spec.csv_paths]
    labels = [Path(p).stem for p in spec.csv_paths]
    if spec.figure_id == "fig1":
        _render_sweeps(tables, labels, spec.out_path, xlabel=r"$\beta$")
    elif spec.figure_id == "fig2":
        _render_sweep_overlay(tables, labels, spec.out_path)
    elif spec.figure_id in ("fig3", "fig4"):
        _render_jensen(tables, labels, spec.out_path)
    elif spec.figure_id == "fig5":
        if len(tables) != 1:
            raise SchemaError("fig5 takes exactly one sphere-scan CSV")
        _render_sphere(tables[0], spec.out_path)
    elif spec.figure_id == "fig6":
        _render_bosonic(tables, labels, spec.out_path)
    elif spec.figure_id == "fig7":
        if len(tables) != 1:
            raise SchemaError("fig7 takes exactly one bias CSV")
        _render_mle_bias(tables[0], spec.out_path)
    return dict(zip(spec.csv_paths, tables))
