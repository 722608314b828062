"""Morse indices, kernels and extremal eigenpairs of tridiagonal pencils.

Everything rests on counting: by Sylvester's law the inertia of ``K - s M``
(``M`` positive definite) gives the number of generalized eigenvalues below,
at and above ``s``. The counts come from an LDL^T factorization with Bunch's
1x1 / 2x2 pivoting for tridiagonal matrices, which needs no interchanges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from .assembly import Grid, OperatorPencil, assemble_operator
from .errors import ConjscanError
from .problem import AngularMode, Problem

BUNCH_ALPHA = (math.sqrt(5.0) - 1.0) / 2.0
MAX_NU = 256
DEFAULT_KERNEL_TOL = 1e-8


@dataclass(frozen=True)
class Inertia:
    n_neg: int
    n_zero: int
    n_pos: int

    @property
    def order(self) -> int:
        return self.n_neg + self.n_zero + self.n_pos


class _Breakdown(Exception):
    pass


def tridiagonal_inertia(diag, off) -> Inertia:
    """Inertia of the symmetric tridiagonal matrix with the given diagonals.

    Uses Bunch's pivoting rule: a 1x1 pivot ``d_k`` is accepted when
    ``|d_k| * s >= alpha * e_k^2`` (``s`` the largest entry magnitude),
    otherwise the leading 2x2 block is eliminated. Raises ``_Breakdown`` if a
    2x2 pivot is exactly singular or a non-finite value appears.
    """
    d = [float(v) for v in diag]
    e = [float(v) for v in off]
    n = len(d)
    if n == 0:
        return Inertia(0, 0, 0)
    scale = max(max(map(abs, d)), max(map(abs, e)) if e else 0.0)
    if not math.isfinite(scale):
        raise _Breakdown("non-finite entry")
    a_scale = BUNCH_ALPHA / scale if scale > 0 else 0.0
    neg = zero = 0
    k = 0
    dk = d[0]
    while k < n:
        if k == n - 1:
            if dk < 0:
                neg += 1
            elif dk == 0:
                zero += 1
            break
        ek = e[k]
        if abs(dk) >= a_scale * ek * ek:
            if dk < 0:
                neg += 1
                dk = d[k + 1] - ek * ek / dk
            elif dk > 0:
                dk = d[k + 1] - ek * ek / dk
            else:
                # ek is zero too: a decoupled zero eigenvalue
                zero += 1
                dk = d[k + 1]
            k += 1
        else:
            d1 = d[k + 1]
            det = dk * d1 - ek * ek
            if det == 0.0 or not math.isfinite(det):
                raise _Breakdown("singular 2x2 pivot")
            if det < 0:
                neg += 1
            elif dk + d1 < 0:
                neg += 2
            if k + 2 < n:
                e1 = e[k + 1]
                dk = d[k + 2] - e1 * e1 * dk / det
            k += 2
        if not math.isfinite(dk):
            raise _Breakdown("non-finite pivot")
    return Inertia(neg, zero, n - neg - zero)


def pencil_inertia(pencil: OperatorPencil, sigma: float) -> Inertia:
    """Counts of generalized eigenvalues of ``(K, M)`` below, at and above ``sigma``."""
    nudge = 1e-12 * max(abs(sigma), pencil.K.norm() / pencil.M.norm())
    for attempt in range(4):
        s = sigma + attempt * nudge
        try:
            return tridiagonal_inertia(*pencil.shifted(s))
        except _Breakdown:
            continue
    raise ConjscanError("INERTIA_BREAKDOWN", "factorization failed after 3 shift perturbations",
                        sigma=sigma, r=pencil.r)


def count_below(pencil: OperatorPencil, sigma: float) -> int:
    return pencil_inertia(pencil, sigma).n_neg


def _modes_at(problem: Problem, r: float, grid: Grid) -> dict[int, int]:
    """Negative-eigenvalue count per angular mode, auto-extended in ``nu``."""
    listed = max(m.nu for m in problem.modes)
    counts: dict[int, int] = {}
    nu = 0
    while True:
        if nu > MAX_NU:
            raise ConjscanError("MODE_OVERFLOW", "mode extension exceeded nu = 256", r=r)
        counts[nu] = count_below(assemble_operator(problem, problem.mode(nu), r, grid), 0.0)
        if nu > 0 and counts[nu] > counts[nu - 1]:
            raise ConjscanError("MODE_ORDER_VIOLATION", "negative count increased with nu",
                                nu=nu, r=r)
        if nu > listed and nu >= 1 and counts[nu] == 0 and counts[nu - 1] == 0:
            return counts
        nu += 1


def mode_morse_indices(problem: Problem, r: float, grid: Grid) -> dict[int, int]:
    """Unweighted negative counts per contributing mode (``{0: n}`` on the interval)."""
    if problem.kind == "interval":
        return {0: count_below(assemble_operator(problem, None, r, grid), 0.0)}
    return _modes_at(problem, r, grid)


def morse_index(problem: Problem, r: float, grid: Grid) -> int:
    """Number of negative eigenvalues of the Hessian at radius ``r``, with multiplicity."""
    counts = mode_morse_indices(problem, r, grid)
    if problem.kind == "interval":
        return counts[0]
    return sum(problem.mode(nu).multiplicity_weight * c for nu, c in counts.items())


@dataclass
class KernelBasis:
    tolerance: float
    vectors: list[np.ndarray] = field(default_factory=list)
    eigenvalues: list[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def __bool__(self) -> bool:
        return bool(self.vectors)


def kernel_window(pencil: OperatorPencil, tau: float) -> float:
    return tau * float(np.abs(pencil.K.diag).max())


def kernel_dimension(pencil: OperatorPencil, tau: float = DEFAULT_KERNEL_TOL) -> int:
    w = kernel_window(pencil, tau)
    return count_below(pencil, w) - count_below(pencil, -w)


def kernel_basis(pencil: OperatorPencil, tau: float = DEFAULT_KERNEL_TOL) -> KernelBasis:
    """M-orthonormal basis of the generalized eigenvectors with ``|lambda| <= tau * max|diag K|``."""
    if not (0.0 < tau <= 1e-3):
        raise ConjscanError("INVALID_TOLERANCE", "kernel tolerance must lie in (0, 1e-3]", tau=tau)
    w = kernel_window(pencil, tau)
    lo, hi = count_below(pencil, -w), count_below(pencil, w)
    basis = KernelBasis(tau)
    if hi == lo:
        return basis
    solver = _Bisector(pencil)
    solver.seed(-w, lo)
    solver.seed(w, hi)
    pairs = _eigenpairs(pencil, solver, range(lo, hi))
    for lam, vec in pairs:
        basis.eigenvalues.append(lam)
        basis.vectors.append(vec)
    return basis


class _Bisector:
    """Eigenvalue isolation by bisection on cached inertia counts."""

    def __init__(self, pencil: OperatorPencil):
        self.pencil = pencil
        self.counts: dict[float, int] = {}
        knorm, mnorm = pencil.K.norm(), pencil.M.norm()
        # eigenvalue scale of the pencil; the weighted mass degenerates near the
        # origin, so a Gershgorin bound on M would make this floor useless
        self.abs_tol = 8.0 * np.finfo(float).eps * knorm / mnorm
        mlow = float((pencil.M.diag - np.abs(np.r_[pencil.M.off, 0.0]) - np.abs(np.r_[0.0, pencil.M.off])).min())
        if mlow <= 0:
            mlow = float(pencil.M.diag.min()) / 4.0
        self.spread = knorm / mlow + knorm / mnorm

    def seed(self, sigma: float, count: int) -> None:
        self.counts[sigma] = count

    def count(self, sigma: float) -> int:
        if sigma not in self.counts:
            self.counts[sigma] = count_below(self.pencil, sigma)
        return self.counts[sigma]

    def bracket(self, j: int) -> tuple[float, float]:
        """Tightest cached ``(lo, hi)`` with ``count(lo) <= j < count(hi)``."""
        lows = [s for s, c in self.counts.items() if c <= j]
        highs = [s for s, c in self.counts.items() if c > j]
        if not lows:
            s = -1.0
            while self.count(s) > j:
                s *= 2.0
            lows = [s]
        if not highs:
            s = 1.0
            while self.count(s) <= j:
                s *= 2.0
                if s > 1e3 * self.spread:
                    raise ConjscanError("EIGENSOLVER_STAGNATION", "no upper bracket", index=j)
            highs = [s]
        return max(lows), min(highs)

    def eigenvalue(self, j: int, rel_tol: float = 1e-10) -> float:
        """``j``-th smallest generalized eigenvalue (0-based)."""
        lo, hi = self.bracket(j)
        while hi - lo > max(rel_tol * max(abs(lo), abs(hi)), self.abs_tol):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            if self.count(mid) > j:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)


def _m_inner(M, u, v) -> float:
    return float(u @ M.matvec(v))


def _inverse_iteration(pencil: OperatorPencil, lam: float, previous: list[np.ndarray],
                       seed: int, max_iter: int = 200) -> np.ndarray:
    K, M = pencil.K, pencil.M
    knorm = K.norm()
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(pencil.order)
    shift = lam
    step = 1e-10 * max(abs(lam), knorm / M.norm() * 1e-6, 1e-300)
    ab = None
    for _ in range(4):
        d, o = pencil.shifted(shift)
        ab = np.zeros((3, pencil.order))
        ab[0, 1:] = o
        ab[1] = d
        ab[2, :-1] = o
        try:
            solve_banded((1, 1), ab, M.matvec(x), check_finite=False)
            break
        except (LinAlgError, ValueError):
            shift = shift - step
            step *= 10.0
    polish = 0
    for _ in range(max_iter):
        for p in previous:
            x = x - _m_inner(M, p, x) * p
        x = x / math.sqrt(_m_inner(M, x, x))
        residual = np.linalg.norm(K.matvec(x) - lam * M.matvec(x))
        if residual <= 1e-6 * knorm:
            # a couple of extra steps drive the vector to rounding level, which
            # M-orthogonality against the other eigenvectors needs
            polish += 1
            if polish > 2:
                return x
        with np.errstate(all="ignore"):
            y = solve_banded((1, 1), ab, M.matvec(x), check_finite=False)
        if not np.all(np.isfinite(y)):
            raise ConjscanError("EIGENSOLVER_STAGNATION", "inverse iteration produced non-finite values")
        x = y
    raise ConjscanError("EIGENSOLVER_STAGNATION", "inverse iteration did not converge", eigenvalue=lam)


def _eigenpairs(pencil: OperatorPencil, solver: _Bisector, indices) -> list[tuple[float, np.ndarray]]:
    pairs: list[tuple[float, np.ndarray]] = []
    for j in indices:
        lam = solver.eigenvalue(j)
        cluster_tol = 1e-6 * max(abs(lam), solver.abs_tol * 1e3)
        previous = [v for (mu, v) in pairs if abs(mu - lam) <= cluster_tol]
        pairs.append((lam, _inverse_iteration(pencil, lam, previous, seed=j)))
    return pairs


def smallest_eigenpairs(pencil: OperatorPencil, k: int) -> list[tuple[float, np.ndarray]]:
    """The ``k`` algebraically smallest generalized eigenpairs, vectors M-normalized."""
    if not (1 <= k <= pencil.order):
        raise ConjscanError("INVALID_COUNT", "need 1 <= k <= order", k=k, order=pencil.order)
    return _eigenpairs(pencil, _Bisector(pencil), range(k))


def smallest_eigenvalues(pencil: OperatorPencil, k: int) -> list[float]:
    """Eigenvalues only (no inverse iteration)."""
    solver = _Bisector(pencil)
    return [solver.eigenvalue(j) for j in range(k)]
