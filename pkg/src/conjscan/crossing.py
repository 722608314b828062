"""Crossing forms at conjugate instants, evaluated two independent ways.

The derivative route restricts ``dK/dr`` to the numerical kernel. The
boundary route uses only the kernel's normal derivative at ``x = 1``:

    Gamma[u] = -(1 / r0) * a(r0) * (du/dnu(1))^2

which is what the bulk integral collapses to for kernel elements. The two
share no code path beyond the kernel vectors themselves.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .assembly import Grid, assemble_operator, assemble_parameter_derivative, SymmetricBandedMatrix
from .errors import ConjscanError
from .inertia import DEFAULT_KERNEL_TOL, KernelBasis, kernel_basis, kernel_dimension, mode_morse_indices
from .problem import AngularMode, Problem

DEFAULT_REGULARITY_TOL = 1e-6
FORM_AGREEMENT_TOL = 1e-2
SUSPECT_RATIO = 1e-6


class KernelSuspectWarning(UserWarning):
    """A kernel vector with (numerically) vanishing normal derivative on the boundary."""


def crossing_form_derivative(k_dot: SymmetricBandedMatrix, kernel: KernelBasis) -> np.ndarray:
    """``C^T dK/dr C`` over the M-orthonormal kernel vectors ``C``."""
    if not kernel:
        raise ConjscanError("NO_CROSSING", "kernel is empty")
    C = np.column_stack(kernel.vectors)
    form = C.T @ np.column_stack([k_dot.matvec(c) for c in kernel.vectors])
    return 0.5 * (form + form.T)


def normal_derivatives(kernel: KernelBasis, first_node: int, grid: Grid) -> np.ndarray:
    """One-sided second-order estimate of ``u'(1)`` for each kernel vector."""
    out = []
    for c in kernel.vectors:
        u = np.zeros(grid.n_nodes)
        u[first_node:first_node + len(c)] = c
        out.append((3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * grid.h))
    return np.array(out)


def _first_node(problem: Problem, mode: AngularMode | None) -> int:
    if problem.kind == "interval":
        return 1
    return 0 if mode.nu == 0 else 1


def crossing_form_boundary(problem: Problem, mode: AngularMode | None, r0: float,
                           kernel: KernelBasis, grid: Grid) -> np.ndarray:
    if not kernel:
        raise ConjscanError("NO_CROSSING", "kernel is empty")
    dn = normal_derivatives(kernel, _first_node(problem, mode), grid)
    amplitude = np.array([np.abs(c).max() for c in kernel.vectors])
    if np.any(np.abs(dn) <= SUSPECT_RATIO * amplitude):
        warnings.warn(KernelSuspectWarning(f"KERNEL_SUSPECT: vanishing normal derivative at r0={r0:.12g}"),
                      stacklevel=2)
    a_boundary = float(problem.a(np.array([r0]))[0])
    return -(a_boundary / r0) * np.outer(dn, dn)


def crossing_signature(form: np.ndarray, tau: float = DEFAULT_REGULARITY_TOL) -> tuple[int, bool]:
    """(number of positive minus negative eigenvalues, nondegenerate?)."""
    if not (0.0 < tau <= 1e-2):
        raise ConjscanError("INVALID_TOLERANCE", "regularity tolerance must lie in (0, 1e-2]", tau=tau)
    eig = np.linalg.eigvalsh(np.atleast_2d(form))
    cut = tau * (np.abs(eig).max() if eig.size else 0.0)
    significant = np.abs(eig) > cut
    signature = int(np.sum(eig[significant] > 0) - np.sum(eig[significant] < 0))
    return signature, bool(significant.all())


@dataclass
class CrossingReport:
    r0: float
    multiplicity: int
    modes: tuple[int, ...]
    gamma_derivative: np.ndarray
    gamma_boundary: np.ndarray
    signature: int
    regular: bool
    condition: float
    negative_definite: bool
    forms_rel_disagreement: float
    kernel_suspect: bool = False
    isolation_delta: float | None = None
    isolation_verified: bool | None = None
    issues: list[str] = field(default_factory=list)

    @property
    def gamma_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.gamma_derivative)

    @property
    def theorem_holds(self) -> bool:
        return "THEOREM_VIOLATION" not in self.issues

    def to_row(self) -> dict:
        eig = self.gamma_eigenvalues
        return {
            "r0": self.r0,
            "multiplicity": self.multiplicity,
            "signature": self.signature,
            "regular": self.regular,
            "gamma_min_eig": float(eig.min()),
            "gamma_max_eig": float(eig.max()),
            "forms_rel_disagreement": self.forms_rel_disagreement,
        }

    def to_dict(self) -> dict:
        row = self.to_row()
        row.update({
            "modes": list(self.modes),
            "condition": self.condition,
            "negative_definite": self.negative_definite,
            "kernel_suspect": self.kernel_suspect,
            "isolation_delta": self.isolation_delta,
            "isolation_verified": self.isolation_verified,
            "issues": list(self.issues),
        })
        return row


def _candidate_modes(problem: Problem, mode, grid: Grid) -> list[AngularMode | None]:
    if problem.kind == "interval":
        return [None]
    if mode is None:
        contributing = mode_morse_indices(problem, 1.0, grid)
        return [problem.mode(nu) for nu, c in contributing.items() if c > 0] or [problem.mode(0)]
    if isinstance(mode, AngularMode):
        return [mode]
    return list(mode)


def isolation_check(problem: Problem, modes: Sequence[AngularMode | None], r0: float, grid: Grid,
                    delta: float, extra_points: Iterable[float] = (),
                    tau: float = DEFAULT_KERNEL_TOL) -> bool:
    """Kernel is empty on a punctured ``delta``-window around ``r0``.

    Probes ``r0 +/- delta * 2^-j`` (j = 0..10) plus any ``extra_points`` inside
    the window (typically the scan grid).
    """
    probes = {r0 + s * delta * 2.0**-j for j in range(11) for s in (-1.0, 1.0)}
    probes.update(r for r in extra_points if 0 < abs(r - r0) <= delta)
    for r in sorted(probes):
        if not (0.0 < r <= 1.0) or r == r0:
            continue
        for m in modes:
            if kernel_dimension(assemble_operator(problem, m, r, grid), tau):
                return False
    return True


def certify_conjugate_instant(problem: Problem, mode, r0: float, grid: Grid, *,
                              kernel_tol: float = DEFAULT_KERNEL_TOL,
                              regularity_tol: float = DEFAULT_REGULARITY_TOL,
                              isolation_delta: float | None = None,
                              scan_points: Iterable[float] = ()) -> CrossingReport:
    """Kernel, both crossing forms, signature and pass/fail flags at ``r0``.

    ``mode`` may be ``None`` (interval, or all contributing radial modes), one
    :class:`AngularMode`, or a sequence of them for a merged crossing. A
    radial block is repeated ``multiplicity_weight`` times.
    """
    blocks_d, blocks_b, used = [], [], []
    suspect = False
    for m in _candidate_modes(problem, mode, grid):
        pencil = assemble_operator(problem, m, r0, grid)
        kernel = kernel_basis(pencil, kernel_tol)
        if not kernel:
            continue
        gd = crossing_form_derivative(assemble_parameter_derivative(problem, m, r0, grid), kernel)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", KernelSuspectWarning)
            gb = crossing_form_boundary(problem, m, r0, kernel, grid)
        suspect = suspect or any(issubclass(w.category, KernelSuspectWarning) for w in caught)
        weight = 1 if m is None else m.multiplicity_weight
        blocks_d.extend([gd] * weight)
        blocks_b.extend([gb] * weight)
        used.append(0 if m is None else m.nu)
    if not blocks_d:
        raise ConjscanError("NO_CROSSING", "no kernel at this radius", r0=r0)

    gamma_d = scipy.linalg.block_diag(*blocks_d)
    gamma_b = scipy.linalg.block_diag(*blocks_b)
    m_total = gamma_d.shape[0]
    signature, regular = crossing_signature(gamma_d, regularity_tol)
    eig = np.linalg.eigvalsh(gamma_d)
    spectral = np.abs(eig).max()
    condition = float(np.abs(eig).min() / spectral) if spectral > 0 else 0.0
    norm_d = np.linalg.norm(gamma_d)
    disagreement = float(np.linalg.norm(gamma_d - gamma_b) / norm_d) if norm_d > 0 else float("inf")

    issues = []
    if suspect:
        issues.append("KERNEL_SUSPECT")
    if not regular:
        issues.append("DEGENERATE_CROSSING")
    if disagreement > FORM_AGREEMENT_TOL:
        issues.append("FORM_DISAGREEMENT")
    negative_definite = bool(np.all(eig < 0))
    if not negative_definite or signature != -m_total:
        issues.append("THEOREM_VIOLATION")

    report = CrossingReport(float(r0), m_total, tuple(used), gamma_d, gamma_b, signature, regular,
                            condition, negative_definite, disagreement, suspect, issues=issues)
    if isolation_delta is not None:
        # isolation concerns the whole operator, so every contributing mode is probed
        modes = _candidate_modes(problem, None, grid)
        report.isolation_delta = float(isolation_delta)
        report.isolation_verified = isolation_check(problem, modes, r0, grid, isolation_delta,
                                                    scan_points, kernel_tol)
        if not report.isolation_verified:
            report.issues.append("ISOLATION_UNVERIFIED")
    return report
