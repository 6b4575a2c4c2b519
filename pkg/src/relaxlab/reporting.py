"""Report emission: delimited tables, JSON dumps, a standalone plotting
script, and directly rendered log-log convergence figures."""

from __future__ import annotations

import csv
import io
import json
import os

import numpy as np

from .config import config_dict
from .runner import RunReport, assert_rates

CSV_COLUMNS = ("eps", "metric_name", "value", "T", "tail_estimate")


def csv_text(report: RunReport) -> str:
    """Deterministic delimited rendering of the error table.

    Rows are ordered by descending eps then by first appearance of the metric;
    floats use repr so identical runs produce identical bytes.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    names = report.table.metric_names()
    for row in report.table.rows:
        for name in names:
            if name not in row.metrics:
                continue
            writer.writerow([
                repr(float(row.eps)),
                name,
                repr(float(row.metrics[name])),
                repr(float(row.T)),
                repr(float(row.tails.get(name, 0.0))),
            ])
    return buf.getvalue()


def emit_csv(report: RunReport, path) -> str:
    text = csv_text(report)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return str(path)


def report_dict(report: RunReport) -> dict:
    out = {
        "config": config_dict(report.config),
        "rows": [
            {
                "eps": float(r.eps),
                "m": int(r.m),
                "T": float(r.T),
                "metrics": {k: float(v) for k, v in r.metrics.items()},
                "tails": {k: float(v) for k, v in r.tails.items()},
            }
            for r in report.table.rows
        ],
        "fits": {
            name: {
                "slope": fit.slope,
                "intercept": fit.intercept,
                "residual": fit.residual,
            }
            for name, fit in report.fits.items()
        },
        "diagnostics": report.diagnostics,
        "timings": report.timings,
    }
    return out


def emit_json(report: RunReport, path) -> str:
    with open(path, "w") as fh:
        json.dump(report_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return str(path)


_PLOT_SCRIPT = '''#!/usr/bin/env python
"""Render log-log convergence plots from the delimited sweep table."""

import csv
import os
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

csv_path = sys.argv[1] if len(sys.argv) > 1 else {csv_name!r}
out_png = sys.argv[2] if len(sys.argv) > 2 else {png_name!r}

series = defaultdict(list)
with open(csv_path) as fh:
    for rec in csv.DictReader(fh):
        series[rec["metric_name"]].append((float(rec["eps"]), float(rec["value"])))

fig, ax = plt.subplots(figsize=(7, 5))
for name in sorted(series):
    pts = sorted(series[name])
    eps = np.array([p[0] for p in pts])
    val = np.array([p[1] for p in pts])
    ok = val > 0
    label = name
    if np.count_nonzero(ok) >= 3:
        slope, _ = np.polyfit(np.log(eps[ok]), np.log(val[ok]), 1)
        label = f"{{name}} (slope {{slope:.2f}})"
    ax.loglog(eps, np.where(ok, val, np.nan), "o-", label=label)
ax.set_xlabel("eps")
ax.set_ylabel("error")
ax.grid(True, which="both", alpha=0.3)
ax.legend(fontsize=7)
fig.tight_layout()
fig.savefig(out_png, dpi=150)
print(out_png)
'''


def emit_plotscript(report: RunReport, path, csv_name: str = "sweep.csv",
                    png_name: str = "rates.png") -> str:
    """Write a standalone script that plots the emitted CSV."""
    with open(path, "w") as fh:
        fh.write(_PLOT_SCRIPT.format(csv_name=csv_name, png_name=png_name))
    try:
        os.chmod(path, 0o755)
    except OSError:
        pass
    return str(path)


def render_figures(report: RunReport, out_dir) -> list:
    """Save one log-log figure per metric plus a combined overview."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(out_dir, exist_ok=True)
    written = []

    fig, ax = plt.subplots(figsize=(7, 5))
    for name in report.table.metric_names():
        eps, vals = report.table.column(name)
        ok = vals > 0
        label = name
        fit = report.fits.get(name)
        if fit is not None:
            label = f"{name} (slope {fit.slope:.2f})"
        ax.loglog(eps, np.where(ok, vals, np.nan), "o-", label=label)
        if fit is not None and np.count_nonzero(ok) >= 2:
            xs = np.array([eps[ok].min(), eps[ok].max()])
            ax.loglog(xs, np.exp(fit.intercept) * xs**fit.slope, "k--",
                      linewidth=0.7, alpha=0.5)
    ax.set_xlabel("eps")
    ax.set_ylabel("error")
    ax.set_title(f"{report.config.system} sweep, {report.config.preparedness} data")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    combined = os.path.join(out_dir, "rates.png")
    fig.savefig(combined, dpi=150)
    plt.close(fig)
    written.append(combined)

    for name in report.table.metric_names():
        eps, vals = report.table.column(name)
        ok = vals > 0
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.loglog(eps, np.where(ok, vals, np.nan), "o-", color="tab:blue")
        fit = report.fits.get(name)
        if fit is not None and np.count_nonzero(ok) >= 2:
            xs = np.array([eps[ok].min(), eps[ok].max()])
            ax.loglog(xs, np.exp(fit.intercept) * xs**fit.slope, "k--",
                      label=f"slope {fit.slope:.2f}")
            ax.legend()
        ax.set_xlabel("eps")
        ax.set_ylabel(name)
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        path = os.path.join(out_dir, f"{name}.png")
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written


def summary_text(report: RunReport) -> str:
    """Human-oriented sweep summary with fitted slopes and band checks."""
    lines = [f"system={report.config.system} preparedness={report.config.preparedness} "
             f"N={report.config.N} d={report.config.d} T={report.config.T:g} "
             f"m={report.config.m}"]
    for name, fit in sorted(report.fits.items()):
        lines.append(f"  {name}: slope {fit.slope:+.3f} (residual {fit.residual:.2e})")
    checks = assert_rates(report)
    for chk in checks:
        verdict = "PASS" if chk.passed else "FAIL"
        hi = "inf" if not np.isfinite(chk.band[1]) else f"{chk.band[1]:g}"
        lines.append(f"  [{verdict}] {chk.metric}: slope {chk.slope:.3f} "
                     f"in [{chk.band[0]:g}, {hi}]")
    total = report.timings.get("total_seconds")
    if total is not None:
        lines.append(f"  wall time: {total:.1f}s")
    return "\n".join(lines) + "\n"
