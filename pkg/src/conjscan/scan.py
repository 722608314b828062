"""Locating conjugate instants and checking the Morse-index identity.

Per angular mode, the number of negative pencil eigenvalues is sampled on a
uniform radius grid; every unit jump brackets one eigenvalue branch crossing
zero, and the bracket is shrunk by bisection on that count. Crossings from
different modes landing within ``refine_tol`` of each other are merged and
their weighted multiplicities added.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .assembly import Grid, assemble_operator
from .crossing import CrossingReport, certify_conjugate_instant
from .errors import ConjscanError
from .inertia import DEFAULT_KERNEL_TOL, count_below, kernel_dimension, mode_morse_indices, morse_index
from .problem import AngularMode, Problem

log = logging.getLogger(__name__)

DEFAULT_SAMPLES = 64
DEFAULT_REFINE_TOL = 1e-10
DEFAULT_R_MIN = 1e-3
MAX_DENSIFY = 4


def max_workers() -> int:
    """Worker cap from ``CONJSCAN_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("CONJSCAN_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class Crossing:
    r0: float
    multiplicity: int
    modes: tuple[int, ...] = (0,)


def _scan_mode(problem: Problem, mode: AngularMode | None, grid: Grid, samples: int,
               refine_tol: float, r_min: float) -> list[float]:
    def count(r: float) -> int:
        return count_below(assemble_operator(problem, mode, r, grid), 0.0)

    n = samples
    for attempt in range(MAX_DENSIFY + 1):
        rs = np.linspace(r_min, 1.0, n)
        counts = [count(r) for r in rs]
        jumps = np.diff(counts)
        if np.all((jumps == 0) | (jumps == 1)):
            break
        if attempt == MAX_DENSIFY:
            bad = int(np.flatnonzero((jumps != 0) & (jumps != 1))[0])
            raise ConjscanError("BRACKET_AMBIGUOUS", "eigenvalue branches not separated",
                                mode=None if mode is None else mode.nu,
                                bracket=(float(rs[bad]), float(rs[bad + 1])), jump=int(jumps[bad]))
        n = 2 * n - 1
    if counts[0] != 0:
        log.warning("negative eigenvalue already present at r_min=%g (mode %s)", r_min,
                    None if mode is None else mode.nu)

    roots = []
    for i in np.flatnonzero(jumps == 1):
        lo, hi = float(rs[i]), float(rs[i + 1])
        target = counts[i]
        while hi - lo > refine_tol:
            mid = 0.5 * (lo + hi)
            if count(mid) > target:
                hi = mid
            else:
                lo = mid
        roots.append(0.5 * (lo + hi))
    return roots


def scan_modes(problem: Problem, grid: Grid) -> list[AngularMode | None]:
    """Modes that can carry crossings in (0, 1): those with negative eigenvalues at r = 1."""
    if problem.kind == "interval":
        return [None]
    counts = mode_morse_indices(problem, 1.0, grid)
    return [problem.mode(nu) for nu, c in counts.items() if c > 0]


def scan_conjugate_instants(problem: Problem, grid: Grid, r_samples: int = DEFAULT_SAMPLES,
                            refine_tol: float = DEFAULT_REFINE_TOL,
                            r_min: float = DEFAULT_R_MIN) -> list[Crossing]:
    """Conjugate instants in ``(r_min, 1)`` with their weighted multiplicities."""
    if r_samples < 64:
        raise ConjscanError("INVALID_SAMPLES", "need at least 64 radius samples", r_samples=r_samples)
    modes = scan_modes(problem, grid)

    def work(mode):
        return mode, _scan_mode(problem, mode, grid, r_samples, refine_tol, r_min)

    workers = min(max_workers(), max(1, len(modes)))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(work, modes))
    else:
        results = [work(m) for m in modes]

    found = []
    for mode, roots in results:
        for r0 in roots:
            if r0 >= 1.0:
                continue
            nu = 0 if mode is None else mode.nu
            weight = 1 if mode is None else mode.multiplicity_weight
            found.append((r0, weight, nu))
    found.sort()

    merged: list[Crossing] = []
    for r0, weight, nu in found:
        if merged and r0 - merged[-1].r0 <= refine_tol:
            last = merged[-1]
            merged[-1] = Crossing(last.r0, last.multiplicity + weight, last.modes + (nu,))
        else:
            merged.append(Crossing(r0, weight, (nu,)))
    return merged


@dataclass
class ScanReport:
    problem_digest: str
    n_nodes: int
    r_samples: int
    refine_tol: float
    r_min: float
    kernel_tol: float
    crossings: list[CrossingReport]
    morse_index_at_1: int
    smale_lhs: int
    smale_rhs: int
    smale_holds: bool
    bifurcation_lower_bound: int
    stepwise_holds: bool = True
    morse_profile: list[tuple[float, int]] = field(default_factory=list)
    issues: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "problem_digest": self.problem_digest,
            "n_nodes": self.n_nodes,
            "r_samples": self.r_samples,
            "refine_tol": self.refine_tol,
            "r_min": self.r_min,
            "kernel_tol": self.kernel_tol,
            "crossings": [c.to_dict() for c in self.crossings],
            "morse_index_at_1": self.morse_index_at_1,
            "smale_lhs": self.smale_lhs,
            "smale_rhs": self.smale_rhs,
            "smale_holds": self.smale_holds,
            "stepwise_holds": self.stepwise_holds,
            "bifurcation_lower_bound": self.bifurcation_lower_bound,
            "morse_profile": [[r, k] for r, k in self.morse_profile],
            "issues": list(self.issues),
        }


def certify_crossings(problem: Problem, grid: Grid, crossings: list[Crossing], *,
                      kernel_tol: float = DEFAULT_KERNEL_TOL, r_samples: int = DEFAULT_SAMPLES,
                      r_min: float = DEFAULT_R_MIN) -> list[CrossingReport]:
    """Certify each crossing; the isolation window is half the gap to its neighbours."""
    scan_points = np.linspace(r_min, 1.0, r_samples)
    reports = []
    rs = [c.r0 for c in crossings]
    for i, c in enumerate(crossings):
        gaps = [c.r0 - r_min, 1.0 - c.r0]
        if i > 0:
            gaps.append(0.5 * (c.r0 - rs[i - 1]))
        if i + 1 < len(rs):
            gaps.append(0.5 * (rs[i + 1] - c.r0))
        delta = min(gaps)
        mode = None if problem.kind == "interval" else [problem.mode(nu) for nu in c.modes]
        report = certify_conjugate_instant(problem, mode, c.r0, grid, kernel_tol=kernel_tol,
                                           isolation_delta=delta, scan_points=scan_points)
        if report.multiplicity != c.multiplicity:
            report.issues.append("MULTIPLICITY_MISMATCH")
        reports.append(report)
    return reports


def bifurcation_lower_bound(scan: ScanReport | int, multiplicities: list[int] | None = None) -> int:
    """``floor(mu / max m(r))``, or 0 without crossings."""
    if isinstance(scan, ScanReport):
        mu = scan.smale_lhs
        multiplicities = [c.multiplicity for c in scan.crossings]
    else:
        mu = int(scan)
    if mu <= 0 or not multiplicities:
        return 0
    return mu // max(multiplicities)


def verify_smale_identity(problem: Problem, grid: Grid, scan: list[Crossing] | None = None, *,
                          r_samples: int = DEFAULT_SAMPLES, refine_tol: float = DEFAULT_REFINE_TOL,
                          r_min: float = DEFAULT_R_MIN, kernel_tol: float = DEFAULT_KERNEL_TOL,
                          strict: bool = False) -> ScanReport:
    """Compare the Morse index at ``r = 1`` with the summed multiplicities.

    Also checks the stepwise form: the index is constant between crossings
    and rises by exactly ``m(r0)`` across each. With ``strict`` a mismatch
    raises ``SMALE_VIOLATION``; otherwise it is recorded on the report.
    """
    issues = []
    if scan is None:
        scan = scan_conjugate_instants(problem, grid, r_samples, refine_tol, r_min)
    # a mode whose eigenvalue sits exactly at 0 has no negative count, so check every evaluated mode
    at_one = [None] if problem.kind == "interval" else \
        [problem.mode(nu) for nu in mode_morse_indices(problem, 1.0, grid)]
    if any(kernel_dimension(assemble_operator(problem, m, 1.0, grid), kernel_tol) for m in at_one):
        issues.append("M1_NONZERO")

    reports = certify_crossings(problem, grid, scan, kernel_tol=kernel_tol, r_samples=r_samples,
                                r_min=r_min)
    for rep in reports:
        if not rep.regular:
            log.warning("degenerate crossing at r0=%.12g excluded from the sum", rep.r0)
    counted = [rep for rep in reports if rep.regular]

    mu = morse_index(problem, 1.0, grid)
    rhs = sum(c.multiplicity for c in scan if c.r0 < 1.0 and
              any(rep.r0 == c.r0 and rep.regular for rep in reports))

    # Morse index at r_min, between consecutive crossings, and at 1
    rs = [c.r0 for c in scan]
    probes = [r_min] + [0.5 * (a + b) for a, b in zip(rs, rs[1:])] + [1.0]
    profile = [(float(r), morse_index(problem, float(r), grid)) for r in probes]
    stepwise = profile[0][1] == 0 and all(
        after - before == c.multiplicity
        for (_, before), (_, after), c in zip(profile, profile[1:], scan))

    holds = mu == rhs
    if not holds or not stepwise:
        issues.append("SMALE_VIOLATION")
    if any(not rep.theorem_holds for rep in reports):
        issues.append("THEOREM_VIOLATION")

    report = ScanReport(problem.digest(), grid.n_nodes, r_samples, refine_tol, r_min, kernel_tol,
                        reports, mu, mu, rhs, holds, 0, stepwise, profile, issues)
    report.bifurcation_lower_bound = bifurcation_lower_bound(mu, [r.multiplicity for r in counted])
    if len(counted) < report.bifurcation_lower_bound:
        report.issues.append("BOUND_VIOLATION")
    if strict and "SMALE_VIOLATION" in issues:
        raise ConjscanError("SMALE_VIOLATION", "Morse index differs from summed multiplicities",
                            lhs=mu, rhs=rhs, profile=profile)
    return report
