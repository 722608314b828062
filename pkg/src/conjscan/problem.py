"""Continuous problems: the 1D interval case and the radial n-ball case.

Both are scaled to the unit interval in the variable ``x`` (or the radius
``rho``): the domain of radius ``r`` is handled downstream by evaluating the
coefficients at ``r * x``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from math import comb
from typing import Sequence, Union

import numpy as np

from .errors import ConjscanError
from .fields import CoefficientField, Nonlinearity

VALIDATION_SAMPLES = 2001


@dataclass(frozen=True, order=True)
class AngularMode:
    """Angular Fourier mode ``nu`` of a separated solution on the ``dimension``-ball."""

    nu: int
    dimension: int = 2

    def __post_init__(self):
        if self.nu < 0 or self.dimension < 2:
            raise ConjscanError("INVALID_MODE", "need nu >= 0 and dimension >= 2",
                                nu=self.nu, dimension=self.dimension)

    @property
    def multiplicity_weight(self) -> int:
        # dimension of degree-nu spherical harmonics on S^{n-1}; 1 or 2 when n = 2
        n, nu = self.dimension, self.nu
        if nu == 0:
            return 1
        return comb(nu + n - 1, n - 1) - comb(nu + n - 3, n - 1)

    @property
    def angular_eigenvalue(self) -> float:
        return float(self.nu * (self.nu + self.dimension - 2))


@dataclass(frozen=True)
class Interval1DProblem:
    a: CoefficientField
    f: CoefficientField
    g: Nonlinearity | None = None
    name: str = "interval"

    kind = "interval"

    def digest(self) -> str:
        return _digest({"kind": self.kind, "a": self.a.describe(), "f": self.f.describe(),
                        "g": None if self.g is None else self.g.describe()})


@dataclass(frozen=True)
class RadialProblem:
    dimension: int
    a: CoefficientField
    f: CoefficientField
    modes: tuple[AngularMode, ...] = ()
    g: Nonlinearity | None = None
    name: str = "radial"

    kind = "radial"

    def __post_init__(self):
        if self.dimension < 2:
            raise ConjscanError("INVALID_DIMENSION", "radial problems need dimension >= 2",
                                dimension=self.dimension)
        modes = tuple(m if isinstance(m, AngularMode) else AngularMode(int(m), self.dimension)
                      for m in self.modes) or (AngularMode(0, self.dimension),)
        nus = [m.nu for m in modes]
        if any(b <= a for a, b in zip(nus, nus[1:])):
            raise ConjscanError("INVALID_MODES", "mode list must be strictly increasing", modes=nus)
        if any(m.dimension != self.dimension for m in modes):
            raise ConjscanError("INVALID_MODES", "mode dimension differs from problem dimension")
        object.__setattr__(self, "modes", modes)

    def mode(self, nu: int) -> AngularMode:
        return AngularMode(nu, self.dimension)

    def digest(self) -> str:
        return _digest({"kind": self.kind, "dimension": self.dimension, "a": self.a.describe(),
                        "f": self.f.describe(), "modes": [m.nu for m in self.modes],
                        "g": None if self.g is None else self.g.describe()})


Problem = Union[Interval1DProblem, RadialProblem]


def _digest(payload: dict) -> str:
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Issue:
    code: str
    message: str
    points: tuple[float, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return not self.issues

    @property
    def codes(self) -> list[str]:
        return [issue.code for issue in self.issues]

    def raise_if_failed(self) -> None:
        if self.issues:
            first = self.issues[0]
            raise ConjscanError(first.code, first.message, points=len(first.points))

    def format(self) -> str:
        if self.passed:
            return "validation: pass"
        lines = ["validation: FAIL"]
        for issue in self.issues:
            shown = ", ".join(f"{p:.6g}" for p in issue.points[:8])
            more = f" (+{len(issue.points) - 8} more)" if len(issue.points) > 8 else ""
            lines.append(f"  {issue.code}: {issue.message} at [{shown}]{more}")
        return "\n".join(lines)


def _bad_points(xs: np.ndarray, mask: np.ndarray) -> tuple[float, ...]:
    return tuple(float(v) for v in xs[mask])


def validate(problem: Problem, samples: int = VALIDATION_SAMPLES) -> ValidationReport:
    """Check ellipticity, finiteness and the trivial-branch conditions on a dense sample."""
    xs = np.linspace(0.0, 1.0, samples)
    issues: list[Issue] = []

    for label, fld in (("a", problem.a), ("f", problem.f)):
        vals = fld(xs)
        bad = ~np.isfinite(vals)
        if bad.any():
            issues.append(Issue("COEFFICIENT_EVALUATION_FAILURE", f"{label} is not finite",
                                _bad_points(xs, bad)))

    avals = problem.a(xs)
    nonpos = ~(avals > 0)
    if nonpos.any():
        issues.append(Issue("ELLIPTICITY_VIOLATION", "diffusion coefficient a is not positive",
                            _bad_points(xs, nonpos)))

    if problem.g is not None:
        g0 = problem.g.g(xs, np.zeros_like(xs))
        off = ~(np.abs(g0) <= 1e-12)
        if off.any():
            issues.append(Issue("TRIVIAL_BRANCH_VIOLATION", "g(x, 0) != 0", _bad_points(xs, off)))
        dg0 = problem.g.dg_dxi(xs, np.zeros_like(xs))
        fvals = problem.f(xs)
        mismatch = ~(np.abs(dg0 - fvals) <= 1e-10 * np.maximum(1.0, np.abs(fvals)))
        if mismatch.any():
            issues.append(Issue("LINEARIZATION_MISMATCH", "dg/du(x, 0) differs from f",
                                _bad_points(xs, mismatch)))

    return ValidationReport(tuple(issues))


def interval_problem(a: str | float | CoefficientField = 1.0, f: str | float | CoefficientField = 0.0,
                     g: str | Nonlinearity | None = None, name: str = "interval") -> Interval1DProblem:
    """Convenience constructor accepting expression strings or numbers."""
    return Interval1DProblem(_as_field(a), _as_field(f), _as_nonlinearity(g), name)


def radial_problem(dimension: int, a: str | float | CoefficientField = 1.0,
                   f: str | float | CoefficientField = 0.0, modes: Sequence[int] = (0,),
                   g: str | Nonlinearity | None = None, name: str = "radial") -> RadialProblem:
    return RadialProblem(dimension, _as_field(a), _as_field(f),
                         tuple(AngularMode(int(nu), dimension) for nu in modes),
                         _as_nonlinearity(g), name)


def _as_field(value) -> CoefficientField:
    if isinstance(value, CoefficientField):
        return value
    if isinstance(value, (int, float)):
        return CoefficientField.constant(value)
    return CoefficientField.from_expression(str(value))


def _as_nonlinearity(value) -> Nonlinearity | None:
    if value is None or isinstance(value, Nonlinearity):
        return value
    return Nonlinearity.from_expression(str(value))
