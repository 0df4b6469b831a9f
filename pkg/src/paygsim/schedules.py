"""Piecewise-constant year schedules.

Most scenario inputs (contribution rates, inflation, expected return,
retirement thresholds) are a single number that occasionally changes for a few
calendar years. A Schedule holds a default value plus explicit per-year
overrides and answers value-at-year lookups.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CoverageError

_MISSING = object()


@dataclass(frozen=True)
class Schedule:
    """Year-indexed piecewise-constant value.

    Args:
        default: value used for any year without an override. May be None,
            in which case every projection year must have an override.
        overrides: mapping year -> value.
    """

    default: float | None = None
    overrides: dict[int, float] = field(default_factory=dict)

    def value(self, year: int) -> float:
        v = self.overrides.get(year, _MISSING)
        if v is not _MISSING:
            return v
        if self.default is None:
            raise CoverageError(f"schedule has no value for year {year}")
        return self.default

    def covers(self, years) -> bool:
        if self.default is not None:
            return True
        return all(y in self.overrides for y in years)

    @classmethod
    def from_config(cls, raw, where: str = "schedule") -> "Schedule":
        """Build from a bare number or a {default:, overrides: {year: v}} mapping."""
        if isinstance(raw, (int, float)) and not isinstance(raw, bool):
            return cls(default=float(raw))
        if isinstance(raw, dict):
            default = raw.get("default")
            overrides = raw.get("overrides", {})
            bad = set(raw) - {"default", "overrides"}
            if bad:
                raise ValueError(f"{where}: unknown keys {sorted(bad)}")
            if not isinstance(overrides, dict):
                raise ValueError(f"{where}.overrides: expected a year->value mapping")
            return cls(
                default=None if default is None else float(default),
                overrides={int(y): float(v) for y, v in overrides.items()},
            )
        raise ValueError(f"{where}: expected a number or a mapping, got {type(raw).__name__}")
