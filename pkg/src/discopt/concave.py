"""Piecewise-linear discounted price functions.

A discount curve ``d`` maps a linear cost to the price an agent actually
charges.  Valid curves satisfy ``d(0) = 0``, are non-decreasing and concave,
and never exceed the identity.  Curves are stored as breakpoints plus the
slope used beyond the last breakpoint.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np

from discopt.exceptions import DomainError

SLOPE_TOL = 1e-9


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class DiscountCurve:
    """Concave piecewise-linear discount function.

    Parameters
    ----------
    breakpoints : sequence of (x, y)
        Cost/price pairs, starting at ``(0, 0)`` with strictly increasing x.
    final_slope : float
        Price per unit cost beyond the last breakpoint.

    Construction does not validate; call :func:`validate` before evaluating
    curves from untrusted sources.
    """

    breakpoints: tuple[tuple[float, float], ...]
    final_slope: float
    _xs: tuple[float, ...] = field(init=False, repr=False, compare=False)
    _ys: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __init__(self, breakpoints, final_slope: float):
        pts = tuple((float(x), float(y)) for x, y in breakpoints)
        if not pts:
            raise DomainError("a discount curve needs at least one breakpoint")
        object.__setattr__(self, "breakpoints", pts)
        object.__setattr__(self, "final_slope", float(final_slope))
        object.__setattr__(self, "_xs", tuple(p[0] for p in pts))
        object.__setattr__(self, "_ys", tuple(p[1] for p in pts))

    def __call__(self, x: float) -> float:
        return evaluate(self, x)

    def slopes(self) -> list[float]:
        """Slopes of every segment, left to right, ending with the final slope."""
        xs, ys = self._xs, self._ys
        out = [(ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]) for i in range(len(xs) - 1)]
        out.append(self.final_slope)
        return out

    def lines(self) -> list[tuple[float, float]]:
        """Segment lines as ``(slope, intercept)`` pairs.

        For a concave curve, ``d(x) == min(m * x + b for m, b in lines())`` for
        every ``x >= 0``.
        """
        xs, ys = self._xs, self._ys
        out = []
        for i, m in enumerate(self.slopes()):
            out.append((m, ys[i] - m * xs[i]))
        return out

    def to_dict(self) -> dict:
        return {"breakpoints": [[x, y] for x, y in self.breakpoints],
                "final_slope": self.final_slope}

    @classmethod
    def from_dict(cls, data: dict) -> "DiscountCurve":
        return cls([tuple(p) for p in data["breakpoints"]], data["final_slope"])


def evaluate(curve: DiscountCurve, x: float) -> float:
    """Price charged for linear cost ``x``."""
    if x < 0 or x != x:
        raise DomainError(f"discount curves are defined for x >= 0, got {x}")
    xs, ys = curve._xs, curve._ys
    if x >= xs[-1]:
        return ys[-1] + curve.final_slope * (x - xs[-1])
    i = bisect.bisect_right(xs, x) - 1
    if x == xs[i]:
        return ys[i]
    frac = (x - xs[i]) / (xs[i + 1] - xs[i])
    return ys[i] + frac * (ys[i + 1] - ys[i])


def validate(curve: DiscountCurve) -> ValidationReport:
    """Check the discounted-price properties and name every violation."""
    violations: list[str] = []
    warnings: list[str] = []
    xs, ys = curve._xs, curve._ys
    if xs[0] != 0.0 or ys[0] != 0.0:
        violations.append(f"d(0)!=0: first breakpoint is ({xs[0]}, {ys[0]})")
    if not all(np.isfinite(xs)) or not all(np.isfinite(ys)) or not np.isfinite(curve.final_slope):
        violations.append("non-finite breakpoint or slope")
        return ValidationReport(tuple(violations), tuple(warnings))
    for i in range(len(xs) - 1):
        if not xs[i + 1] > xs[i]:
            violations.append(f"breakpoints: x not strictly increasing at index {i + 1}")
    if violations and any(v.startswith("breakpoints") for v in violations):
        return ValidationReport(tuple(violations), tuple(warnings))

    slopes = curve.slopes()
    for i, m in enumerate(slopes):
        if m < -SLOPE_TOL:
            violations.append(f"monotonicity: segment {i} has negative slope {m}")
        elif abs(m) <= SLOPE_TOL:
            warnings.append(f"segment {i} is flat (slope {m})")
    for i in range(len(slopes) - 1):
        if slopes[i + 1] > slopes[i] + SLOPE_TOL:
            violations.append(
                f"concavity: slope rises from {slopes[i]} to {slopes[i + 1]} at segment {i + 1}")
    if slopes[0] > 1 + SLOPE_TOL:
        violations.append(f"d(x)<=x: first slope {slopes[0]} exceeds 1")
    return ValidationReport(tuple(violations), tuple(warnings))


def identity_curve(cap: float) -> DiscountCurve:
    """The linear-cost special case ``d(x) = x``."""
    if not cap > 0:
        raise DomainError(f"identity curve cap must be positive, got {cap}")
    return DiscountCurve([(0.0, 0.0), (cap, cap)], 1.0)


def random_curve(rng: np.random.Generator, scale: float = 10.0, max_segments: int = 3) -> DiscountCurve:
    """Draw a valid concave curve with 1 to ``max_segments`` segments."""
    nseg = int(rng.integers(1, max_segments + 1))
    slopes = np.sort(rng.uniform(0.05, 1.0, size=nseg))[::-1]
    widths = rng.uniform(0.2, 1.0, size=nseg - 1) * scale
    pts = [(0.0, 0.0)]
    x = y = 0.0
    for m, w in zip(slopes[:-1], widths):
        x, y = x + float(w), y + float(m * w)
        pts.append((x, y))
    if len(pts) == 1:
        pts.append((scale, float(slopes[0] * scale)))
    return DiscountCurve(pts, float(slopes[-1]))
