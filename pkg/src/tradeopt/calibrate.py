"""Calibration of the utility/cost conversion factor and sensitivities.

Two small tables drive everything: granularity points pairing a data-derived
identifiability cost with the bits of utility people demand for it, and a
sensitivity-level to required-speedup map. Speedups become bits via log2, and
the conversion factor comes from a least-squares line through the origin
(the tradeoff admits no affine offset, so an intercept is diagnostic only).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

from .errors import SchemaError, TradeoptError
from .schema import NEVER_SHARE

NEVER_LEVEL_TOKENS = ("never", "inf")


@dataclass(frozen=True)
class GranularityPoint:
    """One disclosure granularity: its cost and the bits demanded for it."""

    label: str
    cost: float
    bits: float

    def __post_init__(self):
        if self.cost < 0:
            raise ValueError(f"{self.label}: cost must be >= 0")
        if self.bits < 0:
            raise ValueError(f"{self.label}: bits must be >= 0")


@dataclass(frozen=True)
class CalibrationResult:
    lam: float
    residual: float
    points_used: int
    intercept: float | None = None
    lam_with_intercept: float | None = None

    def to_dict(self) -> dict:
        out = {
            "lambda": self.lam,
            "residual": self.residual,
            "points_used": self.points_used,
        }
        if self.intercept is not None:
            out["intercept"] = self.intercept
            out["lambda_with_intercept"] = self.lam_with_intercept
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def bits_from_speedup(x: float) -> float:
    """Bits of utility equivalent to an x-fold task speedup: log2(x)."""
    if x < 1:
        raise ValueError(f"speedup must be >= 1, got {x}")
    return math.log2(x)


def fit_lambda(points, with_intercept: bool = False) -> CalibrationResult:
    """Least-squares slope through the origin of bits against cost.

    lambda = sum(bits*cost) / sum(cost^2); residual is the sum of squared
    errors of that no-intercept fit. with_intercept adds an ordinary-least-
    squares slope and offset as diagnostics without changing lambda.
    """
    pts = list(points)
    if not pts:
        raise ValueError("at least one granularity point is required")
    sxx = sum(p.cost * p.cost for p in pts)
    if sxx == 0:
        raise TradeoptError("all costs are zero; the conversion factor is undefined")
    sxy = sum(p.bits * p.cost for p in pts)
    lam = sxy / sxx
    residual = sum((p.bits - lam * p.cost) ** 2 for p in pts)
    intercept = None
    lam_i = None
    if with_intercept:
        n = len(pts)
        mx = sum(p.cost for p in pts) / n
        my = sum(p.bits for p in pts) / n
        var = sum((p.cost - mx) ** 2 for p in pts)
        if var == 0:
            lam_i, intercept = 0.0, my
        else:
            lam_i = sum((p.cost - mx) * (p.bits - my) for p in pts) / var
            intercept = my - lam_i * mx
    return CalibrationResult(
        lam=lam,
        residual=residual,
        points_used=len(pts),
        intercept=intercept,
        lam_with_intercept=lam_i,
    )


def _parse_speedup(raw: str) -> float:
    token = raw.strip().lower()
    if token in NEVER_LEVEL_TOKENS:
        return NEVER_SHARE
    return float(raw)


def sensitivity_to_bits(scale_map: dict, attr_levels: dict) -> dict[str, float]:
    """Map each attribute's sensitivity level to bits via the speedup scale.

    A level whose speedup is the never-share sentinel yields the sentinel,
    which drops the attribute from the candidate universe downstream. Only
    the level -> speedup values matter; the labels themselves are arbitrary.
    """
    scale = {
        str(k): _parse_speedup(v) if isinstance(v, str) else v
        for k, v in scale_map.items()
    }
    out = {}
    for attr, level in attr_levels.items():
        key = str(level)
        if key not in scale:
            raise SchemaError(f"attribute {attr!r}: no speedup for level {key!r}")
        speedup = scale[key]
        if math.isinf(speedup):
            out[attr] = NEVER_SHARE
        else:
            out[attr] = bits_from_speedup(speedup)
    return out


def _read_table(path, expected_header: tuple[str, ...]) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise SchemaError(f"{path}: empty table")
    header = tuple(cell.strip() for cell in rows[0])
    if header != expected_header:
        raise SchemaError(
            f"{path}: header must be {','.join(expected_header)!r}, "
            f"got {','.join(header)!r}"
        )
    if len(rows) == 1:
        raise SchemaError(f"{path}: no data rows")
    bad = next((r for r in rows[1:] if len(r) != len(expected_header)), None)
    if bad is not None:
        raise SchemaError(f"{path}: row {bad!r} has {len(bad)} fields")
    return [[cell.strip() for cell in row] for row in rows[1:]]


def read_granularity_csv(path) -> list[GranularityPoint]:
    """Read "label,cost,bits" rows into granularity points."""
    return [
        GranularityPoint(label=label, cost=float(cost), bits=float(bits))
        for label, cost, bits in _read_table(path, ("label", "cost", "bits"))
    ]


def read_scale_csv(path) -> dict[str, float]:
    """Read the "level,speedup" map; speedup "never"/"inf" marks never-share."""
    out = {}
    for level, speedup in _read_table(path, ("level", "speedup")):
        if level in out:
            raise SchemaError(f"{path}: duplicate level {level!r}")
        out[level] = _parse_speedup(speedup)
    return out


def read_levels_csv(path) -> dict[str, str]:
    """Read the "attribute,level" assignment table."""
    out = {}
    for attr, level in _read_table(path, ("attribute", "level")):
        if attr in out:
            raise SchemaError(f"{path}: duplicate attribute {attr!r}")
        out[attr] = level
    return out
