"""Batch command line: evaluate single quantities and run verification
suites that emit JSON/CSV reports plus SVG decay figures.

Exit codes are stable: 0 success, 1 numerical or verification failure,
2 usage error.  All user-visible output goes through a single writer at
the end of each command, so parallel sweeps cannot interleave lines.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .bessel import bessel_i_scaled, bessel_j, bessel_k_scaled
from .errors import ConvergenceFailure, DomainError
from .kernels import (KernelFamily, integrated_kernel_scaled, riesz_kernel_t)
from .report import (config_hash, default_out_dir, write_csv_report,
                     write_decay_figures, write_json_reports,
                     write_operator_csv, write_summary,
                     write_sweep_cells_csv)
from .scaled import ScaledValue
from .schrodinger import psi_weight, subord_g
from .verify import (SUITES, SWEEP_GRID, aggregate, mihlin_sweep,
                     operator_checks, registry, run_all, suite_ids)
from .weights import parse_weight_id

__all__ = ["main", "RunConfig"]


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

_CONFIG_KEYS = ("suite", "out", "parallel", "deep", "plots", "weights")
_BOOL = {"1": True, "true": True, "yes": True,
         "0": False, "false": False, "no": False}


@dataclass(frozen=True)
class RunConfig:
    """Effective settings of a `verify` run after flag/file resolution."""

    suite: str = "all"
    out: str = "./reports"
    parallel: int = 1
    deep: bool = True
    plots: bool = True
    weights: str = ""          # comma-separated weight ids; empty = default

    def as_mapping(self) -> dict[str, str]:
        return {k: str(getattr(self, k)) for k in _CONFIG_KEYS}

    def result_keys(self) -> dict[str, str]:
        """The settings that determine report *content*.  Execution-only
        knobs (parallel, out, plots) stay out so that reruns with a
        different worker count or directory hash identically."""
        return {k: str(getattr(self, k)) for k in ("suite", "deep",
                                                   "weights")}


def parse_config_file(path) -> dict[str, str]:
    """Flat key=value lines mirroring the CLI flags; '#' starts a comment."""
    out: dict[str, str] = {}
    for ln, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{ln}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise DomainError(f"{path}:{ln}: unknown key {key!r} "
                              f"(known: {', '.join(_CONFIG_KEYS)})")
        out[key] = value
    return out


def _as_bool(text: str, key: str) -> bool:
    try:
        return _BOOL[text.lower()]
    except KeyError:
        raise DomainError(f"{key} must be boolean, got {text!r}") from None


def resolve_config(args) -> RunConfig:
    """File values fill unset flags; flags always win."""
    file_cfg = parse_config_file(args.config) if args.config else {}

    suite = args.suite or file_cfg.get("suite", "all")
    if suite not in SUITES:
        raise DomainError(f"unknown suite {suite!r}")
    out = default_out_dir(args.out, file_cfg.get("out"))
    parallel = (args.parallel if args.parallel is not None
                else int(file_cfg.get("parallel", "1")))
    if parallel < 1:
        raise DomainError(f"parallel must be >= 1, got {parallel}")
    deep = (args.deep if args.deep is not None
            else _as_bool(file_cfg.get("deep", "true"), "deep"))
    plots = (args.plots if args.plots is not None
             else _as_bool(file_cfg.get("plots", "true"), "plots"))
    weights = (args.weights if args.weights is not None
               else file_cfg.get("weights", ""))
    return RunConfig(suite=suite, out=str(out), parallel=parallel,
                     deep=deep, plots=plots, weights=weights)


# ---------------------------------------------------------------------------
# eval command
# ---------------------------------------------------------------------------

def _sig(x: float, digits: int = 10) -> str:
    """Exactly `digits` significant digits, trailing zeros kept."""
    if x == 0.0:
        return "0.0"
    e = math.floor(math.log10(abs(x)))
    if -4 <= e < digits:
        return f"{x:.{digits - 1 - e}f}"
    return f"{x:.{digits - 1}e}"


def _fmt_value(sv: ScaledValue) -> str:
    """10 significant digits; scientific carrier outside float range."""
    if sv.mantissa == 0.0:
        return "0.0"
    if abs(sv.log_abs) < 230.0:
        return _sig(sv.to_float())
    return sv.format_scientific(10)


def cmd_eval(args) -> int:
    quantity = args.quantity
    if quantity in ("bessel-i", "bessel-k", "bessel-j"):
        fn = {"bessel-i": bessel_i_scaled, "bessel-k": bessel_k_scaled,
              "bessel-j": bessel_j}[quantity]
        r = fn(args.nu, args.x)
        value, err = _fmt_value(r.value), f"rel_err<={r.rel_err:.2e}"
    elif quantity == "kernel":
        value = _sig(riesz_kernel_t(args.family, args.t, args.u, args.v))
        # floor estimate: the n=0 kernels combine at most four same-sign
        # Bessel atoms, so the component errors add without cancellation
        lo, hi = math.exp(min(args.u, args.v)), math.exp(max(args.u, args.v))
        ri = bessel_i_scaled(args.t, lo).rel_err
        rk = bessel_k_scaled(args.t, hi).rel_err
        err = f"rel_err<={4 * (ri + rk + 1e-15):.2e}"
    elif quantity == "kernel-int":
        u, v = args.u, args.v
        if args.xi is not None:
            if not args.xi > 0.0:
                raise DomainError(f"xi must be positive, got {args.xi}")
            u, v = u + math.log(args.xi), v + math.log(args.xi)
        sv = integrated_kernel_scaled(args.family, args.n, u, v, args.tol)
        value, err = _fmt_value(sv), f"quad_tol<={args.tol:.1e}"
    elif quantity == "subord-g":
        if not args.lam > 0.0:
            raise DomainError(f"lambda must be positive, got {args.lam}")
        value = _sig(float(subord_g(args.lam)))
        err = "rel_err<=4.4e-16 (closed form)"
    elif quantity == "psi":
        value = _sig(psi_weight(args.t, args.zeta, args.tol))
        err = f"err_gate<={args.tol:.1e}"
    else:  # pragma: no cover - argparse restricts choices
        raise DomainError(f"unknown quantity {quantity!r}")
    print(f"{value}  {err}")
    return 0


# ---------------------------------------------------------------------------
# verify command
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    cfg = resolve_config(args)
    cfg_hash = config_hash(cfg.result_keys())
    lines = [f"version={__version__} config_hash={cfg_hash} "
             f"suite={cfg.suite} out={cfg.out}"]

    ratio_reports, op_reports, cells = [], [], None
    if cfg.suite != "operators":
        ids = set(suite_ids(cfg.suite))
        specs = [s for s in registry() if s.id in ids]
        ratio_reports = run_all(parallelism=cfg.parallel, specs=specs)
    if cfg.suite in ("operators", "all"):
        op_reports = operator_checks(deep=cfg.deep)
        sweep_weights = None
        if cfg.weights:
            sweep_weights = [parse_weight_id(tok.strip(), SWEEP_GRID)
                             for tok in cfg.weights.split(",") if tok.strip()]
        cells, sweep_reports, _ = mihlin_sweep(weights=sweep_weights)
        op_reports = op_reports + sweep_reports

    out_dir = Path(cfg.out)
    write_json_reports([*ratio_reports, *op_reports], out_dir, cfg_hash)
    if ratio_reports:
        write_csv_report(ratio_reports, out_dir, cfg_hash)
    if op_reports:
        write_operator_csv(op_reports, out_dir, cfg_hash)
    if cells:
        write_sweep_cells_csv(cells, out_dir, cfg_hash)
    if cfg.plots:
        write_decay_figures(out_dir, cfg_hash)

    ratio_ok, mismatched = aggregate(ratio_reports)
    op_bad = [r.id for r in op_reports if not r.as_expected]
    ok = ratio_ok and not op_bad

    for r in ratio_reports:
        note = " (negative control)" if r.expected == "fail" else ""
        lines.append(f"{r.id}: {r.verdict}{note}")
    for r in op_reports:
        lines.append(f"{r.id}: {r.verdict}  [{r.metric}={r.value:.3e}"
                     f" gate={r.gate:.3e}]")
    counts = {"ratio_specs": len(ratio_reports),
              "operator_checks": len(op_reports),
              "not_as_expected": len(mismatched) + len(op_bad)}
    write_summary(out_dir, cfg_hash, cfg.suite, ok, mismatched + op_bad,
                  counts)
    lines.append(f"result: {'ok' if ok else 'FAIL'} ({counts})")
    print("\n".join(lines))
    if not ok:
        print("not as expected: " + ", ".join(mismatched + op_bad),
              file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_eval_parser(sub) -> None:
    p = sub.add_parser("eval", help="print one evaluated quantity "
                                    "with an error estimate")
    q = p.add_subparsers(dest="quantity", required=True)

    for name, doc in (("bessel-i", "modified Bessel I_nu(x), scaled carrier"),
                      ("bessel-k", "modified Bessel K_nu(x), scaled carrier"),
                      ("bessel-j", "oscillatory Bessel J_nu(x)")):
        b = q.add_parser(name, help=doc)
        b.add_argument("--nu", type=float, required=True,
                       help="order, 0 <= nu <= 4")
        b.add_argument("--x", type=float, required=True,
                       help="argument, x > 0")

    k = q.add_parser("kernel", help="fixed-order multiplier kernel at (u, v)")
    k.add_argument("--family", required=True, choices=["m0", "m1"])
    k.add_argument("--t", type=float, required=True,
                   help="order parameter in (0, 1/2]")
    k.add_argument("--u", type=float, required=True)
    k.add_argument("--v", type=float, required=True)

    ki = q.add_parser("kernel-int",
                      help="order-integrated kernel, optionally at xi != 1")
    ki.add_argument("--family", required=True, choices=["m0", "m1"])
    ki.add_argument("--n", type=int, default=0,
                    help="scale-derivative count (default 0)")
    ki.add_argument("--u", type=float, required=True)
    ki.add_argument("--v", type=float, required=True)
    ki.add_argument("--xi", type=float, default=None,
                    help="scale parameter (default 1)")
    ki.add_argument("--tol", type=float, default=1e-8,
                    help="adaptive quadrature tolerance")

    g = q.add_parser("subord-g",
                     help="subordination multiplier g(lambda), closed form")
    g.add_argument("--lambda", dest="lam", type=float, required=True)

    ps = q.add_parser("psi", help="heat-kernel weight psi_t(zeta)")
    ps.add_argument("--t", type=float, required=True,
                    help="heat time in [0.05, 5]")
    ps.add_argument("--zeta", type=float, required=True)
    ps.add_argument("--tol", type=float, default=1e-6,
                    help="cancellation gate for the oscillatory quadrature")


def _add_verify_parser(sub) -> None:
    p = sub.add_parser("verify", help="run a verification suite and "
                                      "write JSON/CSV/SVG reports")
    p.add_argument("--suite", choices=list(SUITES), default=None,
                   help="which checks to run (default: all)")
    p.add_argument("--out", default=None,
                   help="output directory (default: config file, then "
                        "$RKL_OUT_DIR, then ./reports)")
    p.add_argument("--parallel", type=int, default=None,
                   help="worker threads for the sweep registry (default 1)")
    p.add_argument("--config", default=None,
                   help="key=value file mirroring these flags; "
                        "flags override the file")
    p.add_argument("--weights", default=None,
                   help="comma-separated weight ids for the norm sweep "
                        "(default: the registered family)")
    p.add_argument("--deep", dest="deep", action="store_true", default=None,
                   help="full-size operator grids (default)")
    p.add_argument("--no-deep", dest="deep", action="store_false",
                   help="coarse operator grids, for smoke runs")
    p.add_argument("--plots", dest="plots", action="store_true", default=None,
                   help="write SVG decay figures (default)")
    p.add_argument("--no-plots", dest="plots", action="store_false")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rkl",
        description="Bessel-resolvent kernel evaluators and the "
                    "verification sweeps built on them.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_eval_parser(sub)
    _add_verify_parser(sub)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "eval":
            return cmd_eval(args)
        return cmd_verify(args)
    except DomainError as exc:
        print(f"rkl: usage error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceFailure, OverflowError) as exc:
        print(f"rkl: numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
