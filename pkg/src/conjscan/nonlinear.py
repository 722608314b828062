"""Shooting for the nonlinear 1D problem and the bifurcation cross-check.

The initial value problem

    -(a u')' + g(x, u) = 0,   u(0) = 0,   u'(0) = s

is integrated as the first-order system ``u' = p / a``, ``p' = g(x, u)``,
``q' = (p / a)^2`` so that ``sqrt(q(r))`` is the H^1_0(0, r) seminorm. A zero
of ``u`` at ``x = r`` is a nontrivial Dirichlet solution on ``(0, r)``. The
IVP does not depend on ``r``, so one trajectory yields every branch radius
for a given ``s``; zeros come from the integrator's event location.

This path shares no code with the Galerkin assembly, which is the point.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConjscanError
from .problem import Problem
from .scan import DEFAULT_R_MIN, Crossing, ScanReport, max_workers

RTOL = 1e-10
BLOWUP = 1e8
DEFAULT_S_SCHEDULE = (1e-2, 1e-3, 1e-4)
MATCH_FLOOR = 1e-4


@dataclass(frozen=True)
class ShootingState:
    r: float
    s: float
    value: float
    derivative: float
    amplitude: float


@dataclass
class _Trajectory:
    s: float
    zeros: list[float]
    sol: object | None

    def state(self, problem: Problem, r: float) -> ShootingState:
        if self.sol is None:
            return ShootingState(r, self.s, 0.0, 0.0, 0.0)
        u, p, q = self.sol(r)
        a = float(problem.a(r))
        return ShootingState(float(r), self.s, float(u), float(p / a), float(np.sqrt(max(q, 0.0))))


def _require_nonlinear(problem: Problem) -> None:
    if problem.kind != "interval":
        raise ConjscanError("UNSUPPORTED_PROBLEM", "shooting is implemented for interval problems only")
    if problem.g is None:
        raise ConjscanError("NONLINEARITY_REQUIRED", "problem has no nonlinearity g")


def _integrate(problem: Problem, s: float, r_end: float = 1.0) -> _Trajectory:
    _require_nonlinear(problem)
    if s == 0.0:
        # g(x, 0) = 0, so the trivial branch is exact
        return _Trajectory(0.0, [], None)
    a, g = problem.a, problem.g.g

    def rhs(x, y):
        ax = float(a(x))
        du = y[1] / ax
        return [du, float(g(x, y[0])), du * du]

    def crossing(x, y):
        return y[0]

    def blowup(x, y):
        return BLOWUP * (1.0 + abs(s)) - abs(y[0])

    blowup.terminal = True
    scale = abs(s)
    sol = solve_ivp(rhs, (0.0, r_end), [0.0, s * float(a(0.0)), 0.0], method="RK45", rtol=RTOL,
                    atol=[1e-12 * scale, 1e-12 * scale, 1e-12 * scale * scale],
                    events=[crossing, blowup], dense_output=True)
    if sol.status == -1 or len(sol.t_events[1]) or not np.all(np.isfinite(sol.y)):
        raise ConjscanError("SHOOT_BLOWUP", "solution blew up before the end of the interval",
                            s=s, reached=float(sol.t[-1]))
    zeros = sorted(float(x) for x in sol.t_events[0] if x > 0.0)
    return _Trajectory(float(s), zeros, sol.sol)


def shoot(problem: Problem, r: float, s: float) -> ShootingState:
    """State of the shooting solution with initial slope ``s`` at ``x = r``."""
    if not (0.0 < r <= 1.0):
        raise ConjscanError("PARAMETER_OUT_OF_RANGE", "radius must lie in (0, 1]", r=r)
    return _integrate(problem, s, r).state(problem, r)


def branch_radii(problem: Problem, s: float, r_min: float = DEFAULT_R_MIN) -> list[float]:
    """All ``r`` in ``(r_min, 1]`` with ``u_s(r) = 0``, increasing."""
    return [z for z in _integrate(problem, s).zeros if z > r_min]


def branch_radius(problem: Problem, s: float, r_min: float = DEFAULT_R_MIN) -> float | None:
    """Smallest ``r`` in ``(r_min, 1]`` at which ``u_s`` vanishes, or ``None``."""
    radii = branch_radii(problem, s, r_min)
    return radii[0] if radii else None


@dataclass
class BranchPoint:
    s: float
    k: int
    r: float
    amplitude: float


@dataclass
class BifurcationReport:
    conjugate_instants: list[float]
    s_schedule: tuple[float, ...]
    points: list[BranchPoint]
    limits: list[float]
    tolerances: list[float]
    matched: dict[int, int | None]
    amplitudes_decreasing: bool
    radii_converging: bool
    issues: list[str] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.limits)

    @property
    def holds(self) -> bool:
        return not self.issues

    def to_dict(self) -> dict:
        return {
            "conjugate_instants": self.conjugate_instants,
            "s_schedule": list(self.s_schedule),
            "limits": self.limits,
            "tolerances": self.tolerances,
            "matched": {str(k): v for k, v in self.matched.items()},
            "count": self.count,
            "amplitudes_decreasing": self.amplitudes_decreasing,
            "radii_converging": self.radii_converging,
            "issues": list(self.issues),
        }


def _instants(scan) -> list[float]:
    if isinstance(scan, ScanReport):
        return [c.r0 for c in scan.crossings]
    return [c.r0 if isinstance(c, Crossing) else float(c) for c in scan]


def verify_bifurcation_theorem(problem: Problem, scan, s_schedule=DEFAULT_S_SCHEDULE, *,
                               r_min: float = DEFAULT_R_MIN, match_floor: float = MATCH_FLOOR,
                               strict: bool = False) -> BifurcationReport:
    """Check that branch radii accumulate exactly at the conjugate instants as ``s -> 0``.

    The k-th zero at the smallest slope is the limit estimate; its tolerance is
    ``max(10 |r(s_min, k) - r(s_min / 2, k)|, match_floor)``. The floor absorbs
    the Galerkin error of the scanned instants. A limit with no instant nearby
    is a ``CONVERSE_VIOLATION``; an instant with no limit nearby is a
    ``THEOREM_VIOLATION``.
    """
    _require_nonlinear(problem)
    schedule = tuple(sorted((float(s) for s in s_schedule), key=abs, reverse=True))
    if not schedule or any(s == 0.0 for s in schedule):
        raise ConjscanError("INVALID_SCHEDULE", "s_schedule needs nonzero slopes", s_schedule=s_schedule)
    instants = _instants(scan)
    slopes = schedule + (schedule[-1] / 2.0,)

    def work(s):
        traj = _integrate(problem, s)
        return traj, [z for z in traj.zeros if z > r_min]

    workers = min(max_workers(), len(slopes))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            shots = list(pool.map(work, slopes))
    else:
        shots = [work(s) for s in slopes]

    points = []
    for (traj, radii), s in zip(shots[:-1], schedule):
        for k, r in enumerate(radii, start=1):
            points.append(BranchPoint(s, k, r, traj.state(problem, r).amplitude))

    finest, half = shots[-2][1], shots[-1][1]
    n_limits = min(len(finest), len(half))
    limits = finest[:n_limits]
    tolerances = [max(10.0 * abs(finest[k] - half[k]), match_floor) for k in range(n_limits)]

    issues = []
    matched: dict[int, int | None] = {}
    for k, (lim, tol) in enumerate(zip(limits, tolerances), start=1):
        near = [i for i, r0 in enumerate(instants) if abs(lim - r0) <= tol]
        matched[k] = near[0] if near else None
        if not near:
            issues.append("CONVERSE_VIOLATION")
    hit = {i for i in matched.values() if i is not None}
    if len(hit) < len(instants):
        issues.append("THEOREM_VIOLATION")

    amplitudes_ok = converging = True
    for k in range(1, n_limits + 1):
        seq = [p for p in points if p.k == k]
        amps = [p.amplitude for p in seq]
        amplitudes_ok &= all(b < a for a, b in zip(amps, amps[1:]))
        target = instants[matched[k]] if matched.get(k) is not None else limits[k - 1]
        errs = [abs(p.r - target) for p in seq]
        converging &= all(b <= a + match_floor for a, b in zip(errs, errs[1:]))
    if not amplitudes_ok:
        issues.append("AMPLITUDE_NOT_DECREASING")

    report = BifurcationReport(instants, schedule, points, limits, tolerances, matched,
                               amplitudes_ok, converging, sorted(set(issues), key=issues.index))
    if strict and "CONVERSE_VIOLATION" in report.issues:
        unmatched = [limits[k - 1] for k, v in matched.items() if v is None]
        raise ConjscanError("CONVERSE_VIOLATION", "branch radii accumulate away from conjugate instants",
                            radii=unmatched)
    return report
