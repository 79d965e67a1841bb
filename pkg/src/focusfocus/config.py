"""Run configuration: a single JSON document with fixed blocks.

Unknown keys are errors.  Every validation message starts with the dotted
path of the offending key, e.g. ``model.epsilon``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ValidationError
from .integrate.integrator import DEFAULT_MAX_STEPS, TOL_RANGE
from .model import ModelFoliation, TransitionSeries, build_model
from .series import TruncatedSeries2

SYMMETRY_NAMES = ("flip-q2", "flip-q1")


@dataclass(frozen=True)
class ModelBlock:
    series: TruncatedSeries2
    epsilon: float = 0.4
    k: int = 1
    transitions: tuple[TruncatedSeries2, ...] = ()
    backend: str = "analytic"
    collar_margin: float = 0.2


@dataclass(frozen=True)
class GridBlock:
    r_min: float
    r_max: float
    n_r: int = 16
    n_theta: int = 32


@dataclass(frozen=True)
class FitBlock:
    degree: int = 4
    residual_ceiling: float = 1e-6


@dataclass(frozen=True)
class IntegratorBlock:
    tol: float = 1e-10
    max_steps: int = DEFAULT_MAX_STEPS
    min_abs_c: float | None = None


@dataclass(frozen=True)
class OutputBlock:
    directory: str = "out"
    emit_csv: bool = True
    emit_svg: bool = True


@dataclass(frozen=True)
class MonodromyBlock:
    radius: float
    n_theta: int = 64
    center: tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class MultipinchBlock:
    offsets: tuple[tuple[float, float], ...] | None = None
    max_offset: float = 0.1
    n_check: int = 16


@dataclass(frozen=True)
class SymmetryBlock:
    which: tuple[str, ...] = SYMMETRY_NAMES


@dataclass(frozen=True)
class RunConfig:
    model: ModelBlock
    grid: GridBlock
    fit: FitBlock = field(default_factory=FitBlock)
    integrator: IntegratorBlock = field(default_factory=IntegratorBlock)
    output: OutputBlock = field(default_factory=OutputBlock)
    monodromy: MonodromyBlock | None = None
    multipinch: MultipinchBlock = field(default_factory=MultipinchBlock)
    symmetry: SymmetryBlock = field(default_factory=SymmetryBlock)
    seed: int = 0

    def build(self) -> ModelFoliation:
        m = self.model
        return build_model(m.series, m.epsilon, m.k, m.transitions, m.collar_margin)

    def monodromy_block(self) -> MonodromyBlock:
        if self.monodromy is not None:
            return self.monodromy
        return MonodromyBlock(radius=0.25 * self.model.epsilon)


# -- parsing helpers -------------------------------------------------------------


def _fail(path: str, msg: str):
    raise ValidationError(f"{path}: {msg}")


def _block(raw: Any, path: str, allowed: set[str]) -> dict:
    if not isinstance(raw, dict):
        _fail(path, "must be an object")
    extra = sorted(set(raw) - allowed)
    if extra:
        _fail(f"{path}.{extra[0]}" if path else extra[0], "unknown key")
    return raw


def _num(raw: dict, key: str, path: str, default=None, *, lo=None, hi=None, lo_open=False, hi_open=False):
    p = f"{path}.{key}"
    if key not in raw:
        if default is None:
            _fail(p, "required")
        return default
    v = raw[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(p, f"must be a number, got {v!r}")
    v = float(v)
    if lo is not None and (v <= lo if lo_open else v < lo):
        _fail(p, f"out of range: {v} (must be {'>' if lo_open else '>='} {lo})")
    if hi is not None and (v >= hi if hi_open else v > hi):
        _fail(p, f"out of range: {v} (must be {'<' if hi_open else '<='} {hi})")
    return v


def _int(raw: dict, key: str, path: str, default=None, lo=None):
    p = f"{path}.{key}"
    if key not in raw:
        if default is None:
            _fail(p, "required")
        return default
    v = raw[key]
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(p, f"must be an integer, got {v!r}")
    if lo is not None and v < lo:
        _fail(p, f"out of range: {v} (must be >= {lo})")
    return v


def _bool(raw: dict, key: str, path: str, default: bool) -> bool:
    v = raw.get(key, default)
    if not isinstance(v, bool):
        _fail(f"{path}.{key}", f"must be true or false, got {v!r}")
    return v


def _series(raw: Any, path: str) -> TruncatedSeries2:
    if not isinstance(raw, list):
        _fail(path, "must be a list of [i, j, value] triples")
    try:
        return TruncatedSeries2.from_triples(raw)
    except (TypeError, ValueError) as exc:
        _fail(path, str(exc))


def _pair(v: Any, path: str) -> tuple[float, float]:
    if not (isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)):
        _fail(path, f"must be a pair of numbers, got {v!r}")
    return float(v[0]), float(v[1])


# -- blocks ----------------------------------------------------------------------


def _parse_model(raw: Any) -> ModelBlock:
    b = _block(raw, "model", {"series", "epsilon", "k", "transitions", "backend", "collar_margin"})
    if "series" not in b:
        _fail("model.series", "required")
    series = _series(b["series"], "model.series")
    eps = _num(b, "epsilon", "model", 0.4)
    if not 0.0 < eps < 1.0:
        _fail("model.epsilon", f"epsilon out of range (0, 1): {eps}")
    k = _int(b, "k", "model", 1, lo=1)
    tr_raw = b.get("transitions", [])
    if not isinstance(tr_raw, list):
        _fail("model.transitions", "must be a list of series")
    transitions = tuple(_series(t, f"model.transitions[{n}]") for n, t in enumerate(tr_raw))
    if len(transitions) != k - 1:
        _fail("model.transitions", f"transition count: k = {k} needs {k - 1}, got {len(transitions)}")
    for n, t in enumerate(transitions):
        try:
            TransitionSeries(t)
        except ValidationError as exc:
            _fail(f"model.transitions[{n}]", str(exc))
    backend = b.get("backend", "analytic")
    if backend not in ("analytic", "numeric"):
        _fail("model.backend", f"must be 'analytic' or 'numeric', got {backend!r}")
    margin = _num(b, "collar_margin", "model", 0.2, lo=0.0, lo_open=True)
    return ModelBlock(series, eps, k, transitions, backend, margin)


def _parse_grid(raw: Any, eps: float) -> GridBlock:
    b = _block(raw, "grid", {"r_min", "r_max", "n_r", "n_theta"})
    r_min = _num(b, "r_min", "grid", 0.05 * eps, lo=0.0, lo_open=True)
    r_max = _num(b, "r_max", "grid", 0.5 * eps, hi=eps, hi_open=True)
    if not r_min < r_max:
        _fail("grid.r_max", f"must exceed grid.r_min = {r_min}")
    return GridBlock(r_min, r_max, _int(b, "n_r", "grid", 16, lo=2), _int(b, "n_theta", "grid", 32, lo=4))


def _parse_fit(raw: Any) -> FitBlock:
    b = _block(raw, "fit", {"degree", "residual_ceiling"})
    return FitBlock(_int(b, "degree", "fit", 4, lo=1), _num(b, "residual_ceiling", "fit", 1e-6, lo=0.0, lo_open=True))


def _parse_integrator(raw: Any, eps: float, r_min: float, backend: str) -> IntegratorBlock:
    b = _block(raw, "integrator", {"tol", "max_steps", "min_abs_c"})
    tol = _num(b, "tol", "integrator", 1e-10, lo=TOL_RANGE[0], hi=TOL_RANGE[1])
    steps = _int(b, "max_steps", "integrator", DEFAULT_MAX_STEPS, lo=1)
    floor = b.get("min_abs_c")
    if floor is not None:
        floor = _num(b, "min_abs_c", "integrator", lo=0.0, lo_open=True, hi=eps, hi_open=True)
    if backend == "numeric" and r_min < (0.02 * eps if floor is None else floor):
        _fail("grid.r_min", "below the numeric floor integrator.min_abs_c")
    return IntegratorBlock(tol, steps, floor)


def _parse_output(raw: Any) -> OutputBlock:
    b = _block(raw, "output", {"directory", "emit_csv", "emit_svg"})
    d = b.get("directory", "out")
    if not isinstance(d, str) or not d:
        _fail("output.directory", "must be a non-empty string")
    return OutputBlock(d, _bool(b, "emit_csv", "output", True), _bool(b, "emit_svg", "output", True))


def _parse_monodromy(raw: Any, eps: float) -> MonodromyBlock:
    b = _block(raw, "monodromy", {"radius", "n_theta", "center"})
    r = _num(b, "radius", "monodromy", 0.25 * eps)
    if not 0.0 < r < eps:
        _fail("monodromy.radius", f"out of range: {r} (must lie in (0, epsilon = {eps}))")
    center = _pair(b.get("center", [0.0, 0.0]), "monodromy.center")
    if abs(complex(*center)) + r >= eps:
        _fail("monodromy.center", "loop leaves the base disc")
    return MonodromyBlock(r, _int(b, "n_theta", "monodromy", 64, lo=16), center)


def _parse_multipinch(raw: Any, k: int) -> MultipinchBlock:
    b = _block(raw, "multipinch", {"offsets", "max_offset", "n_check"})
    offsets = b.get("offsets")
    if offsets is not None:
        if not isinstance(offsets, list) or len(offsets) != k:
            _fail("multipinch.offsets", f"must list {k} joint-time pairs")
        offsets = tuple(_pair(o, f"multipinch.offsets[{n}]") for n, o in enumerate(offsets))
    return MultipinchBlock(
        offsets,
        _num(b, "max_offset", "multipinch", 0.1, lo=0.0),
        _int(b, "n_check", "multipinch", 16, lo=1),
    )


def _parse_symmetry(raw: Any) -> SymmetryBlock:
    b = _block(raw, "symmetry", {"which"})
    which = b.get("which", list(SYMMETRY_NAMES))
    if not isinstance(which, list) or not which or any(w not in SYMMETRY_NAMES for w in which):
        _fail("symmetry.which", f"must be a non-empty list drawn from {list(SYMMETRY_NAMES)}")
    return SymmetryBlock(tuple(which))


TOP_KEYS = {"model", "grid", "fit", "integrator", "output", "seed", "monodromy", "multipinch", "symmetry"}


def parse_config(raw: Any) -> RunConfig:
    b = _block(raw, "", TOP_KEYS)
    if "model" not in b:
        _fail("model", "required")
    model = _parse_model(b["model"])
    eps = model.epsilon
    grid = _parse_grid(b.get("grid", {}), eps)
    mono = _parse_monodromy(b["monodromy"], eps) if "monodromy" in b else None
    seed = b.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        _fail("seed", f"must be an integer, got {seed!r}")
    return RunConfig(
        model=model,
        grid=grid,
        fit=_parse_fit(b.get("fit", {})),
        integrator=_parse_integrator(b.get("integrator", {}), eps, grid.r_min, model.backend),
        output=_parse_output(b.get("output", {})),
        monodromy=mono,
        multipinch=_parse_multipinch(b.get("multipinch", {}), model.k),
        symmetry=_parse_symmetry(b.get("symmetry", {})),
        seed=seed,
    )


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(raw)


def with_overrides(cfg: RunConfig, backend: str | None = None, degree: int | None = None) -> RunConfig:
    """Apply command-line overrides, re-validating the affected blocks."""
    from dataclasses import replace

    if backend is not None:
        if backend not in ("analytic", "numeric"):
            _fail("--backend", f"must be 'analytic' or 'numeric', got {backend!r}")
        floor = cfg.integrator.min_abs_c if cfg.integrator.min_abs_c is not None else 0.02 * cfg.model.epsilon
        if backend == "numeric" and cfg.grid.r_min < floor:
            _fail("grid.r_min", "below the numeric floor integrator.min_abs_c")
        cfg = replace(cfg, model=replace(cfg.model, backend=backend))
    if degree is not None:
        if degree < 1:
            _fail("--degree", f"must be >= 1, got {degree}")
        cfg = replace(cfg, fit=replace(cfg.fit, degree=degree))
    return cfg
