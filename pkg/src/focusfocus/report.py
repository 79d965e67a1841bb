"""Report artifacts: JSON report, CSV sample dump and two SVG diagnostics."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Sequence

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .invariant import InvariantReport, PeriodSample  # noqa: E402

CSV_HEADER = ["c1", "c2", "tau1", "tau2", "sigma1", "sigma2", "source", "err_estimate"]
REPORT_KEYS = [
    "series",
    "degree",
    "sample_count",
    "annulus",
    "rms_residual",
    "closedness_residual",
    "condition",
    "monodromy",
    "sigma2_at_zero",
    "action_note",
]


def dumps_report(report: InvariantReport, extra: dict | None = None) -> str:
    doc = report.to_dict()
    if extra:
        doc = {**doc, **extra}
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


def write_report(report: InvariantReport, path: str | Path, extra: dict | None = None) -> Path:
    path = Path(path)
    path.write_text(dumps_report(report, extra))
    return path


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def write_samples_csv(samples: Sequence[PeriodSample], path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for s in samples:
            w.writerow([_fmt(v) for v in s.csv_row()])
    return path


def read_samples_csv(path: str | Path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def _save_svg(fig, path: Path) -> Path:
    with matplotlib.rc_context({"svg.hashsalt": "focusfocus", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_sigma_radial(samples: Sequence[PeriodSample], n_theta: int, path: str | Path, max_angles: int = 8) -> Path:
    """``sigma1`` and ``sigma2`` against ``|c|``, one line per sampled angle."""
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.2))
    step = max(1, n_theta // max_angles)
    for m in range(0, n_theta, step):
        ring = samples[m::n_theta]
        r = [abs(s.c.c) for s in ring]
        theta = math.atan2(ring[0].c.c2, ring[0].c.c1)
        axes[0].plot(r, [s.sigma1 for s in ring], lw=1, label=f"{theta:+.2f}")
        axes[1].plot(r, [s.sigma2 for s in ring], lw=1)
    axes[0].set_xlabel("|c|")
    axes[1].set_xlabel("|c|")
    axes[0].set_ylabel("sigma1")
    axes[1].set_ylabel("sigma2")
    axes[0].legend(title="arg c", fontsize=6, title_fontsize=7)
    fig.tight_layout()
    return _save_svg(fig, Path(path))


def plot_coeff_convergence(degrees: Sequence[int], errors: Sequence[float], path: str | Path) -> Path:
    """Coefficient error of the fit against the fit degree (log scale, floored at 1e-17)."""
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    ax.semilogy(list(degrees), [max(e, 1e-17) for e in errors], "o-")
    ax.set_xlabel("fit degree")
    ax.set_ylabel("max coefficient error")
    ax.set_xticks(list(degrees))
    fig.tight_layout()
    return _save_svg(fig, Path(path))
