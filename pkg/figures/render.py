#!/usr/bin/env python3
"""Render figures from hcn-comp CSV reports.

Reads the versioned CSV files emitted by the ``hcn-comp`` CLI and draws one
figure per invocation.  Strictly read-only presentation: nothing is
recomputed from the model, only the numbers present in the CSV are drawn.

Kinds
-----
``coverage``
    Coverage probability vs SIR threshold (dB): analytic lower/upper
    bounds, their interpolation, and the Monte Carlo estimate with a 95%
    confidence band.  Exactly four series.
``tiers``
    Interpolated coverage from one *or more* coverage CSVs overlaid (one
    curve per file, labeled by file name) — e.g. tier subsets of the same
    scenario.
``loadbalance``
    Mean rate and relative load increase vs the tier-2 cluster-threshold
    offset, one curve per activation-threshold branch.
``ratecdf``
    Rate CDFs from a scheduling CSV: one curve per activation branch and
    scheduling mode, silencing solid, frequency reuse dashed.

Usage: ``render.py --csv <file> [--csv <file> ...] --kind <kind> --out <file.png|svg>``
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

EXPECTED_SCHEMA = "1"

#: Columns each figure kind requires, and the CSV command it consumes.
_REQUIREMENTS = {
    "coverage": ("coverage", ["beta_db", "pc_lower", "pc_upper", "pc_linear",
                              "pc_mc", "mc_ci"]),
    "tiers": ("coverage", ["beta_db", "pc_linear"]),
    "loadbalance": ("loadbalance", ["delta2_rel_db", "t2_rel_db", "mean_rate",
                                    "load_increase"]),
    "ratecdf": ("scheduling", ["record", "t2_rel_db", "tau", "cdf_cs",
                               "cdf_fr"]),
}


class RenderError(ValueError):
    """Unusable input CSV or invalid rendering request."""


def read_report(path: str, command: str, columns: list[str]):
    """Parse one versioned CSV; returns ``(column -> index, data rows)``."""
    try:
        with open(path, newline="") as fh:
            rows = [row for row in csv.reader(fh)]
    except OSError as exc:
        raise RenderError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise RenderError(f"{path}: empty CSV — nothing to render")
    meta = dict(item.split("=", 1) for item in rows[0] if "=" in item)
    schema = meta.get("schema")
    if schema != EXPECTED_SCHEMA:
        raise RenderError(
            f"{path}: unsupported schema {schema!r}, expected {EXPECTED_SCHEMA!r}"
        )
    if meta.get("command") != command:
        raise RenderError(
            f"{path}: produced by command {meta.get('command')!r}, "
            f"this kind consumes {command!r} output"
        )
    if len(rows) < 2:
        raise RenderError(f"{path}: missing header row")
    header = rows[1]
    missing = [c for c in columns if c not in header]
    if missing:
        raise RenderError(
            f"{path}: missing required columns: {', '.join(missing)}"
        )
    data = [row for row in rows[2:] if row]
    if not data:
        raise RenderError(f"{path}: no data rows — nothing to render")
    return {c: header.index(c) for c in header}, data


def _column(idx, rows, name):
    return [float(r[idx[name]]) for r in rows]


def render_coverage(paths: list[str]):
    (path,) = paths
    command, columns = _REQUIREMENTS["coverage"]
    idx, rows = read_report(path, command, columns)
    beta = _column(idx, rows, "beta_db")
    mc = _column(idx, rows, "pc_mc")
    ci = _column(idx, rows, "mc_ci")
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    ax.fill_between(
        beta,
        [m - c for m, c in zip(mc, ci)],
        [m + c for m, c in zip(mc, ci)],
        color="0.85",
        label="MC 95% CI",
    )
    ax.plot(beta, _column(idx, rows, "pc_upper"), "--", color="tab:red",
            label="upper bound")
    ax.plot(beta, _column(idx, rows, "pc_lower"), "--", color="tab:blue",
            label="lower bound")
    ax.plot(beta, _column(idx, rows, "pc_linear"), "-", color="tab:green",
            label="interpolated")
    ax.plot(beta, mc, "o-", color="black", markersize=3.5, linewidth=0.8,
            label="Monte Carlo")
    ax.set_xlabel("SIR threshold β (dB)")
    ax.set_ylabel("coverage probability")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(alpha=0.3)
    ax.legend()
    return fig


def render_tiers(paths: list[str]):
    command, columns = _REQUIREMENTS["tiers"]
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for path in paths:
        idx, rows = read_report(path, command, columns)
        ax.plot(
            _column(idx, rows, "beta_db"),
            _column(idx, rows, "pc_linear"),
            "-",
            label=Path(path).stem,
        )
    ax.set_xlabel("SIR threshold β (dB)")
    ax.set_ylabel("coverage probability")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(alpha=0.3)
    ax.legend(title="scenario")
    return fig


def _branches(rows, idx, key):
    seen = []
    for row in rows:
        value = row[idx[key]]
        if value not in seen:
            seen.append(value)
    return seen


def render_loadbalance(paths: list[str]):
    (path,) = paths
    command, columns = _REQUIREMENTS["loadbalance"]
    idx, rows = read_report(path, command, columns)
    fig, (ax_rate, ax_load) = plt.subplots(
        2, 1, figsize=(6.4, 6.2), sharex=True
    )
    for branch in _branches(rows, idx, "t2_rel_db"):
        sel = [r for r in rows if r[idx["t2_rel_db"]] == branch]
        sel.sort(key=lambda r: float(r[idx["delta2_rel_db"]]))
        x = _column(idx, sel, "delta2_rel_db")
        label = f"activation offset {float(branch):+g} dB"
        ax_rate.plot(x, _column(idx, sel, "mean_rate"), "o-", label=label)
        ax_load.plot(
            x,
            [100.0 * v for v in _column(idx, sel, "load_increase")],
            "o-",
            label=label,
        )
    ax_rate.set_ylabel("mean rate (bit/s/Hz)")
    ax_rate.grid(alpha=0.3)
    ax_rate.legend()
    ax_load.set_xlabel("tier-2 cluster-threshold offset (dB)")
    ax_load.set_ylabel("load increase (%)")
    ax_load.grid(alpha=0.3)
    return fig


def render_ratecdf(paths: list[str]):
    (path,) = paths
    command, columns = _REQUIREMENTS["ratecdf"]
    idx, rows = read_report(path, command, columns)
    curves = [r for r in rows if r[idx["record"]] == "curve"]
    if not curves:
        raise RenderError(f"{path}: no curve records — nothing to render")
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    cycle = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for i, branch in enumerate(_branches(curves, idx, "t2_rel_db")):
        sel = [r for r in curves if r[idx["t2_rel_db"]] == branch]
        sel.sort(key=lambda r: float(r[idx["tau"]]))
        tau = _column(idx, sel, "tau")
        color = cycle[i % len(cycle)]
        offset = f"{float(branch):+g} dB"
        ax.plot(tau, _column(idx, sel, "cdf_cs"), "-", color=color,
                label=f"silencing, {offset}")
        ax.plot(tau, _column(idx, sel, "cdf_fr"), "--", color=color,
                label=f"reuse, {offset}")
    ax.set_xlabel("rate τ (bit/s/Hz)")
    ax.set_ylabel("P(rate ≤ τ)")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(alpha=0.3)
    ax.legend(title="mode, activation offset")
    return fig


_RENDERERS = {
    "coverage": render_coverage,
    "tiers": render_tiers,
    "loadbalance": render_loadbalance,
    "ratecdf": render_ratecdf,
}


def render(csv_paths: list[str], kind: str, out: str) -> None:
    """Render ``kind`` from ``csv_paths`` and write the image to ``out``."""
    if kind not in _RENDERERS:
        raise RenderError(f"unknown figure kind {kind!r}")
    suffix = Path(out).suffix.lower()
    if suffix not in (".png", ".svg"):
        raise RenderError(f"output must end in .png or .svg, got {out!r}")
    if kind != "tiers" and len(csv_paths) != 1:
        raise RenderError(f"kind {kind!r} takes exactly one --csv input")
    fig = _RENDERERS[kind](csv_paths)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Render figures from hcn-comp CSV reports.",
        epilog="Pass --csv more than once with --kind tiers to overlay runs.",
    )
    parser.add_argument(
        "--csv", action="append", required=True, metavar="FILE",
        help="input CSV (repeatable for --kind tiers)",
    )
    parser.add_argument(
        "--kind", required=True, choices=sorted(_RENDERERS),
        help="figure kind",
    )
    parser.add_argument(
        "--out", required=True, metavar="FILE.png|FILE.svg",
        help="output image path",
    )
    ns = parser.parse_args(argv)
    try:
        render(ns.csv, ns.kind, ns.out)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
