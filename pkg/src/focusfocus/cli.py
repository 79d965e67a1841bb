"""Command-line front end.

    focusfocus extract    --config run.json [--out DIR] [--backend analytic|numeric] [--degree D]
    focusfocus roundtrip  ...
    focusfocus monodromy  ...
    focusfocus multipinch ...
    focusfocus symmetry   ...

Exit codes: 0 success, 1 a check failed, 2 configuration or validation error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config, with_overrides
from .core import JointTime
from .errors import NumericFailure, ValidationError
from .invariant import (
    InvariantReport,
    SamplingOptions,
    coefficient_error,
    fit_invariant,
    monodromy_matrix,
    multipinch_sigma_sum,
    polar_grid,
    sample_grid,
    symmetry_check,
)
from .report import plot_coeff_convergence, plot_sigma_radial, write_report, write_samples_csv
from .series import compose_total_series, n_coefficients

ROUNDTRIP_TOL = {"analytic": 1e-8, "numeric": 1e-6}
OFFSET_TOL = 1e-9


def _opts(cfg: RunConfig) -> SamplingOptions:
    i = cfg.integrator
    return SamplingOptions(cfg.model.backend, i.tol, i.max_steps, i.min_abs_c)


def _outdir(cfg: RunConfig, out: str | None) -> Path:
    d = Path(out if out is not None else cfg.output.directory)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2) + "\n")


def _reference(cfg: RunConfig, degree: int):
    m = cfg.model
    if m.k == 1:
        return m.series.with_degree(max(degree, m.series.degree))
    return compose_total_series(m.series, m.transitions, max(degree, m.series.degree))


def _extract(cfg: RunConfig, out: Path, with_monodromy: bool = True) -> tuple[InvariantReport, list]:
    system = cfg.build()
    g, opts = cfg.grid, _opts(cfg)
    samples = sample_grid(system, g.r_min, g.r_max, g.n_r, g.n_theta, opts)
    mono = None
    if with_monodromy:
        mb = cfg.monodromy_block()
        mono = monodromy_matrix(system, mb.radius, mb.n_theta, complex(*mb.center), opts).matrix
    report = fit_invariant(samples, cfg.fit.degree, cfg.fit.residual_ceiling, monodromy=mono)
    write_report(report, out / "report.json")
    if cfg.output.emit_csv:
        write_samples_csv(samples, out / "samples.csv")
    if cfg.output.emit_svg:
        plot_sigma_radial(samples, g.n_theta, out / "sigma_radial.svg")
        degrees, errors = [], []
        for d in range(1, cfg.fit.degree + 1):
            if len(samples) >= 2 * n_coefficients(d):
                fit = fit_invariant(samples, d, None)
                degrees.append(d)
                errors.append(coefficient_error(fit.series, _reference(cfg, d)))
        plot_coeff_convergence(degrees, errors, out / "coeff_convergence.svg")
    return report, samples


def cmd_extract(cfg: RunConfig, out: Path) -> int:
    """Sample, fit and report the invariant series."""
    report, samples = _extract(cfg, out)
    print(f"fitted degree {report.degree} series from {len(samples)} samples, rms residual {report.rms_residual:.3e}")
    for i, j, v in report.series.terms():
        print(f"  s_{i}{j} = {v:+.12e}")
    print(f"sigma2(0) = {report.sigma2_at_zero:.12f}; monodromy = {[list(r) for r in report.monodromy]}")
    print(f"wrote {out / 'report.json'}")
    return 0


def cmd_roundtrip(cfg: RunConfig, out: Path) -> int:
    """Extract and compare with the prescribed series."""
    report, _ = _extract(cfg, out, with_monodromy=False)
    err = coefficient_error(report.series, _reference(cfg, report.degree))
    tol = ROUNDTRIP_TOL[cfg.model.backend]
    ok = err <= tol
    _write_json(out / "roundtrip.json", {"backend": cfg.model.backend, "max_error": float(err), "tolerance": tol, "pass": bool(ok)})
    print(f"{'PASS' if ok else 'FAIL'} roundtrip backend={cfg.model.backend} max_err={err:.3e} tol={tol:.0e}")
    return 0 if ok else 1


def cmd_monodromy(cfg: RunConfig, out: Path) -> int:
    """Monodromy matrix around the configured loop."""
    mb = cfg.monodromy_block()
    res = monodromy_matrix(cfg.build(), mb.radius, mb.n_theta, complex(*mb.center), _opts(cfg))
    _write_json(
        out / "monodromy.json",
        {"radius": mb.radius, "center": list(mb.center), "n_theta": mb.n_theta,
         "matrix": [list(r) for r in res.matrix], "deviation": res.deviation},
    )
    print(f"monodromy = {[list(r) for r in res.matrix]} (max deviation from integers {res.deviation:.2e})")
    return 0


def _offsets(cfg: RunConfig) -> list[JointTime]:
    mp = cfg.multipinch
    if mp.offsets is not None:
        return [JointTime(*o) for o in mp.offsets]
    rng = np.random.default_rng(cfg.seed)
    return [JointTime(*rng.uniform(-mp.max_offset, mp.max_offset, 2)) for _ in range(cfg.model.k)]


def cmd_multipinch(cfg: RunConfig, out: Path) -> int:
    """Total series and section-offset invariance of a multi-pinch model."""
    if cfg.model.k < 2:
        raise ValidationError("model.k: multipinch needs k >= 2")
    system, opts, g = cfg.build(), _opts(cfg), cfg.grid
    samples = sample_grid(system, g.r_min, g.r_max, g.n_r, g.n_theta, opts)
    report = fit_invariant(samples, cfg.fit.degree, cfg.fit.residual_ceiling)
    err = coefficient_error(report.series, _reference(cfg, report.degree))
    grid = polar_grid(g.r_min, g.r_max, 2, max(4, cfg.multipinch.n_check // 2))
    offsets = _offsets(cfg)
    change = multipinch_sigma_sum(system, grid, offsets, opts).offset_change
    tol = ROUNDTRIP_TOL[cfg.model.backend]
    ok = err <= tol and change <= OFFSET_TOL
    write_report(report, out / "report.json")
    _write_json(
        out / "multipinch.json",
        {"k": cfg.model.k, "max_error": float(err), "offsets": [[o.t1, o.t2] for o in offsets],
         "offset_change": float(change), "pass": bool(ok)},
    )
    print(f"{'PASS' if ok else 'FAIL'} multipinch k={cfg.model.k} total series max_err={err:.3e}, "
          f"section-offset change={change:.3e}")
    return 0 if ok else 1


def cmd_symmetry(cfg: RunConfig, out: Path) -> int:
    """Invariance of the fit under the two chart symmetries."""
    g, opts = cfg.grid, _opts(cfg)
    tol = ROUNDTRIP_TOL[cfg.model.backend]
    results, ok = {}, True
    for which in cfg.symmetry.which:
        res = symmetry_check(cfg.build(), which, g.r_min, g.r_max, g.n_r, g.n_theta, cfg.fit.degree, opts,
                             cfg.fit.residual_ceiling)
        passed = res.deviation <= tol
        ok &= passed
        results[which] = {"deviation": float(res.deviation), "pass": bool(passed)}
        print(f"{'PASS' if passed else 'FAIL'} symmetry {which} deviation={res.deviation:.3e}")
    _write_json(out / "symmetry.json", {"tolerance": tol, "checks": results})
    return 0 if ok else 1


COMMANDS = {
    "extract": cmd_extract,
    "roundtrip": cmd_roundtrip,
    "monodromy": cmd_monodromy,
    "multipinch": cmd_multipinch,
    "symmetry": cmd_symmetry,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="focusfocus", description="Invariant extraction for focus-focus model systems.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        s = sub.add_parser(name, help=fn.__doc__ or name)
        s.add_argument("--config", required=True, help="JSON run configuration")
        s.add_argument("--out", default=None, help="output directory (overrides output.directory)")
        s.add_argument("--backend", choices=["analytic", "numeric"], default=None)
        s.add_argument("--degree", type=int, default=None, help="fit degree override")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = with_overrides(load_config(args.config), args.backend, args.degree)
        out = _outdir(cfg, args.out)
        return COMMANDS[args.command](cfg, out)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
