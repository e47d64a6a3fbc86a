"""Parameter sweeps producing equilibrium-region and BTB-scenario maps."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

from .btb import compare_btb, on_boundary
from .model import (
    DEFAULT_EPS,
    MarketParams,
    PopulationParams,
    ValidationError,
    hiring_threshold,
    near,
    validate,
)
from .solver import solve_single

FIELDS = ("axis1", "axis2", "label", "p_e_star", "chi_star", "eta_star",
          "delta_employer", "delta_w1_low", "delta_w1_high", "delta_w2_low",
          "delta_w2_high", "boundary")
_DELTA_KEYS = ("employer", "w1_low", "w1_high", "w2_low", "w2_high")

MARKET_KEYS = ("w", "B", "c_L", "c_H", "phi0", "phi1")
PROBABILITY_KEYS = ("phi0", "phi1", "p", "gamma", "p1", "p2")


class SweepMode(str, Enum):
    SINGLE_GROUP = "SingleGroupRegions"
    BTB = "BtbScenarios"


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    steps: int

    def values(self, eps: float = DEFAULT_EPS) -> list[float]:
        # lo + span*(i/(n-1)) keeps shared points bit-identical under refinement
        span = self.hi - self.lo
        vals = [self.lo + span * (i / (self.steps - 1)) for i in range(self.steps)]
        if self.name in PROBABILITY_KEYS:
            vals = [min(max(v, eps), 1 - eps) for v in vals]
        return vals


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple
    fixed: dict
    mode: SweepMode = SweepMode.SINGLE_GROUP
    fmt: str = "csv"

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ValidationError("a sweep needs one or two axes", field="axes")
        known = MARKET_KEYS + ("p", "gamma", "p1", "p2")
        for ax in self.axes:
            if ax.name not in known:
                raise ValidationError(f"unknown sweep axis {ax.name!r}", field="axes")
            if ax.steps < 2:
                raise ValidationError(f"axis {ax.name} needs steps >= 2", field="axes")
        if self.fmt not in ("csv", "json"):
            raise ValidationError(f"unknown output format {self.fmt!r}", field="format")

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        axes = tuple(Axis(a["name"], float(a["min"]), float(a["max"]), int(a["steps"]))
                     for a in d["axes"])
        return cls(axes, dict(d.get("fixed", {})), SweepMode(d.get("mode", "SingleGroupRegions")),
                   d.get("format", "csv"))


@dataclass
class SweepResult:
    spec: SweepSpec
    cells: list = field(default_factory=list)

    def label_counts(self) -> dict:
        return dict(sorted(Counter(c["label"] for c in self.cells).items()))


def _cell_values(spec: SweepSpec, coords) -> dict:
    vals = dict(spec.fixed)
    for ax, x in zip(spec.axes, coords):
        vals[ax.name] = x
    return vals


def _coords_text(spec, coords) -> str:
    return ", ".join(f"{ax.name}={x!r}" for ax, x in zip(spec.axes, coords))


def _evaluate(spec: SweepSpec, coords, eps: float) -> dict:
    vals = _cell_values(spec, coords)
    try:
        params = MarketParams(*(float(vals[k]) for k in MARKET_KEYS))
        pop = None
        if spec.mode is SweepMode.BTB:
            pop = PopulationParams(float(vals["gamma"]), float(vals["p1"]), float(vals["p2"]))
        validate(params, pop)
        if spec.mode is SweepMode.SINGLE_GROUP:
            validate(params, PopulationParams(0.5, float(vals["p"]), float(vals["p"])))
    except KeyError as exc:
        raise ValidationError(f"sweep is missing a value for {exc.args[0]}",
                              field=exc.args[0]) from None
    except ValidationError as exc:
        raise ValidationError(f"cell ({_coords_text(spec, coords)}): {exc}",
                              field=exc.field) from None

    p_e = hiring_threshold(params)
    rec = dict.fromkeys(FIELDS)
    rec["axis1"] = coords[0]
    rec["axis2"] = coords[1] if len(coords) > 1 else None
    rec["p_e_star"] = p_e
    if spec.mode is SweepMode.SINGLE_GROUP:
        p = float(vals["p"])
        eq = solve_single(params, p, eps)[0]
        r = params.cost_ratio
        rec["label"] = eq.label
        rec["chi_star"], rec["eta_star"] = eq.chi_star, eq.eta_star
        rec["boundary"] = any(near(a, b, eps) for a, b in
                              ((params.phi0, r), (params.phi1, r), (p, p_e)))
    else:
        cmp = compare_btb(params, pop, eps)
        rec["label"] = cmp.scenario.value
        rec["chi_star"] = cmp.banned.pooled.chi_star
        rec["eta_star"] = cmp.banned.pooled.eta_star
        for k in _DELTA_KEYS:
            rec[f"delta_{k}"] = cmp.deltas[k]
        rec["boundary"] = on_boundary(params, pop, eps)
    return rec


def _evaluate_row(args):
    spec, row, eps = args
    return [_evaluate(spec, coords, eps) for coords in row]


def run_sweep(spec: SweepSpec, eps: float = DEFAULT_EPS, workers: int = 1) -> SweepResult:
    """Evaluate every grid cell, axis1 outer and axis2 inner.

    With ``workers > 1`` rows are farmed out to processes; results are merged
    in grid order so the output does not depend on scheduling.
    """
    first = spec.axes[0].values(eps)
    second = spec.axes[1].values(eps) if len(spec.axes) > 1 else None
    rows = [[(x, y) for y in second] if second is not None else [(x,)] for x in first]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_evaluate_row, [(spec, r, eps) for r in rows]))
    else:
        chunks = [_evaluate_row((spec, r, eps)) for r in rows]
    return SweepResult(spec, [c for chunk in chunks for c in chunk])


# -- emission ------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return v
    return format(float(v), ".9g")


def _json_value(v):
    if v is None or isinstance(v, (bool, str)):
        return v
    return float(format(float(v), ".9g"))


def format_records(records, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(FIELDS)
        for rec in records:
            writer.writerow([_fmt(rec.get(k)) for k in FIELDS])
        return buf.getvalue()
    if fmt == "json":
        rows = [{k: _json_value(rec.get(k)) for k in FIELDS} for rec in records]
        return json.dumps(rows, indent=1) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def atomic_write(path, text: str) -> None:
    """Write via a temp file in the same directory and rename into place."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise OSError(f"cannot write {path}: {exc}") from exc


def emit(result: SweepResult, path, fmt: str | None = None) -> None:
    atomic_write(path, format_records(result.cells, fmt or result.spec.fmt))


def _parse_field(key: str, text: str):
    if text == "":
        return None
    if key == "label":
        return text
    if key == "boundary":
        return text == "true"
    return float(text)


def read_records(path, fmt: str) -> list[dict]:
    """Parse an emitted sweep table back into records."""
    with open(path, encoding="utf-8", newline="") as fh:
        if fmt == "json":
            return json.load(fh)
        reader = csv.DictReader(fh)
        return [{k: _parse_field(k, row[k]) for k in FIELDS} for row in reader]
