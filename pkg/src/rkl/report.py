"""Serialization of verification reports: JSON, CSV and SVG decay figures.

Every file written here is self-describing: it carries the package version,
a hash of the effective run configuration and the id of the check it came
from, so a report directory can be audited without the command line that
produced it.  Figures are rendered deterministically (fixed hash salt, no
timestamps) so that repeated runs produce bitwise-identical SVG.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from dataclasses import is_dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from . import __version__
from .kernels import KernelFamily, integrated_signed_log
from .verify import OperatorReport, RatioReport, SweepCell

__all__ = [
    "SCHEMA",
    "config_hash",
    "report_to_dict",
    "write_json_reports",
    "write_csv_report",
    "write_operator_csv",
    "write_sweep_cells_csv",
    "write_decay_figures",
    "write_summary",
]

#: version of the JSON report layout; bump only on breaking field changes
SCHEMA = 1


def config_hash(config: Mapping[str, object]) -> str:
    """Stable short hash of an effective configuration mapping."""
    lines = "".join(f"{k}={config[k]}\n" for k in sorted(config))
    return hashlib.sha256(lines.encode()).hexdigest()[:16]


def _jsonable(x):
    """Recursively coerce numpy scalars/arrays and non-finite floats."""
    if isinstance(x, (np.floating, np.integer)):
        x = x.item()
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    if isinstance(x, (str, int, bool)) or x is None:
        return x
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, Mapping):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return str(x)


def _head(rid: str, cfg_hash: str) -> dict:
    return {"schema": SCHEMA, "version": __version__,
            "config_hash": cfg_hash, "id": rid}


def report_to_dict(r, cfg_hash: str = "") -> dict:
    """Flatten a report dataclass into a JSON-ready dict."""
    if isinstance(r, RatioReport):
        d = _head(r.id, cfg_hash)
        d.update(sup_ratio=_jsonable(r.sup_ratio),
                 argmax=_jsonable(r.argmax),
                 samples=r.samples,
                 fitted_constant=_jsonable(r.fitted_constant),
                 verdict=r.verdict, expected=r.expected,
                 drift=_jsonable(r.drift),
                 failure_fraction=_jsonable(r.failure_fraction),
                 trend_axis=r.trend_axis, flags=list(r.flags),
                 statement=r.statement,
                 as_expected=r.as_expected)
        return d
    if isinstance(r, OperatorReport):
        d = _head(r.id, cfg_hash)
        d.update(metric=r.metric, value=_jsonable(r.value),
                 gate=_jsonable(r.gate), verdict=r.verdict,
                 details=_jsonable(r.details), as_expected=r.as_expected)
        return d
    if is_dataclass(r):
        return _jsonable(vars(r))
    raise TypeError(f"cannot serialize {type(r).__name__}")


def _ensure_dir(out_dir) -> Path:
    p = Path(out_dir)
    p.mkdir(parents=True, exist_ok=True)
    return p


def write_json_reports(reports: Iterable, out_dir, cfg_hash: str
                       ) -> list[Path]:
    """One `<id>.json` per report; returns the paths written."""
    out = _ensure_dir(out_dir)
    paths = []
    for r in reports:
        path = out / f"{r.id}.json"
        path.write_text(json.dumps(report_to_dict(r, cfg_hash), indent=2,
                                   allow_nan=False) + "\n")
        paths.append(path)
    return paths


def _csv_header(fh, cfg_hash: str, what: str) -> None:
    fh.write(f"# version={__version__}\n")
    fh.write(f"# config_hash={cfg_hash}\n")
    fh.write(f"# schema={SCHEMA} content={what}; the id column names "
             "the originating check\n")


def _compact(d: Mapping[str, object]) -> str:
    return ";".join(f"{k}={d[k]:.6g}" if isinstance(d[k], float)
                    else f"{k}={d[k]}" for k in d)


def write_csv_report(reports: Iterable[RatioReport], out_dir,
                     cfg_hash: str) -> Path:
    """All ratio sweeps as one table with `#` comment headers."""
    out = _ensure_dir(out_dir) / "reports.csv"
    with open(out, "w", newline="") as fh:
        _csv_header(fh, cfg_hash, "ratio-supremum sweeps")
        w = csv.writer(fh)
        w.writerow(["id", "verdict", "expected", "sup_ratio",
                    "fitted_constant", "drift", "failure_fraction",
                    "samples", "trend_axis", "argmax", "flags"])
        for r in reports:
            w.writerow([r.id, r.verdict, r.expected, f"{r.sup_ratio:.9g}",
                        f"{r.fitted_constant:.9g}", f"{r.drift:.3e}",
                        f"{r.failure_fraction:.3e}", r.samples,
                        r.trend_axis or "", _compact(r.argmax),
                        "|".join(r.flags)])
    return out


def write_operator_csv(reports: Iterable[OperatorReport], out_dir,
                       cfg_hash: str) -> Path:
    out = _ensure_dir(out_dir) / "operator_checks.csv"
    with open(out, "w", newline="") as fh:
        _csv_header(fh, cfg_hash, "operator cross-route checks")
        w = csv.writer(fh)
        w.writerow(["id", "metric", "value", "gate", "verdict"])
        for r in reports:
            w.writerow([r.id, r.metric, f"{r.value:.9g}", f"{r.gate:.9g}",
                        r.verdict])
    return out


def write_sweep_cells_csv(cells: Iterable[SweepCell], out_dir,
                          cfg_hash: str) -> Path:
    """Per (family, n, weight) rows of the weighted-norm sweep."""
    out = _ensure_dir(out_dir) / "sweep_cells.csv"
    with open(out, "w", newline="") as fh:
        _csv_header(fh, cfg_hash, "weighted-norm sweep cells")
        w = csv.writer(fh)
        w.writerow(["family", "n", "weight", "a2", "variation",
                    "norm_max", "norm_min"])
        for c in cells:
            w.writerow([c.family, c.n, c.weight, f"{c.a2:.9g}",
                        f"{c.variation:.6g}", f"{max(c.norms):.9g}",
                        f"{min(c.norms):.9g}"])
    return out


def write_summary(out_dir, cfg_hash: str, suite: str, ok: bool,
                  mismatched: list[str], counts: Mapping[str, int]) -> Path:
    out = _ensure_dir(out_dir) / "summary.json"
    d = _head("summary", cfg_hash)
    d.update(suite=suite, all_as_expected=ok, mismatched=list(mismatched),
             counts=dict(counts))
    out.write_text(json.dumps(d, indent=2, allow_nan=False) + "\n")
    return out


# ---------------------------------------------------------------------------
# decay figures
# ---------------------------------------------------------------------------

#: (label, u(d), v(d)) parameter rays, one per off-diagonal region
_RAYS = (
    ("u,v > 0", lambda d: 0.5, lambda d: 0.5 + d),
    ("u < 0 < v", lambda d: -d / 2, lambda d: d / 2),
    ("u,v < 0", lambda d: -0.5 - d, lambda d: -0.5),
)


def _decay_curve(family: KernelFamily, n: int, ray) -> tuple[np.ndarray,
                                                             np.ndarray]:
    d = np.geomspace(0.05, 12.0, 60)
    u = np.array([ray[1](x) for x in d])
    v = np.array([ray[2](x) for x in d])
    _, logm = integrated_signed_log(family, n, u, v)
    return d, np.asarray(logm) / math.log(10.0)


def write_decay_figures(out_dir, cfg_hash: str) -> list[Path]:
    """|integrated kernel| against |u - v| per region, log-log, one SVG
    per kernel family.  Rendering is pinned for bitwise reproducibility."""
    import matplotlib
    matplotlib.use("svg")
    import matplotlib.pyplot as plt
    matplotlib.rcParams["svg.hashsalt"] = "rkl-decay"
    matplotlib.rcParams["svg.fonttype"] = "none"

    out = _ensure_dir(out_dir)
    paths = []
    for family in (KernelFamily.M0, KernelFamily.M1):
        rid = f"kernel-decay-{family.value}"
        fig, ax = plt.subplots(figsize=(6.0, 4.2))
        for n, style in ((0, "-"), (1, "--")):
            for ray, color in zip(_RAYS, ("#1f77b4", "#d62728", "#2ca02c")):
                d, log10m = _decay_curve(family, n, ray)
                ax.plot(d, log10m, style, color=color, linewidth=1.4,
                        label=f"{ray[0]}, n={n}")
        ax.set_xscale("log")
        ax.set_xlabel("|u - v|")
        ax.set_ylabel("log10 |kernel|")
        ax.set_title(f"integrated kernel decay, family {family.value}")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8, ncol=2)
        path = out / f"{rid}.svg"
        fig.savefig(path, metadata={
            "Date": None,
            "Title": rid,
            "Description": (f"version={__version__} "
                            f"config_hash={cfg_hash} id={rid}"),
        })
        plt.close(fig)
        paths.append(path)
    return paths


def default_out_dir(flag_value: str | None, config_value: str | None) -> Path:
    """Resolution order: CLI flag, config file, RKL_OUT_DIR, ./reports."""
    for cand in (flag_value, config_value, os.environ.get("RKL_OUT_DIR")):
        if cand:
            return Path(cand)
    return Path("./reports")
