"""Piecewise-linear Galerkin discretization of the rescaled bilinear form.

At radius ``r`` the form on the unit interval is

    K(r)[i, j] = int w a(r x) phi_i' phi_j'
               + k_nu int (w / x^2) a(r x) phi_i phi_j
               + r^2 int w f(r x) phi_i phi_j

with weight ``w = x^(n-1)`` and angular eigenvalue ``k_nu = nu (nu + n - 2)``
for radial modes, ``w = 1`` and ``k_nu = 0`` on the interval. ``M`` is the
weighted mass matrix. Element integrals use 3-point Gauss-Legendre.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import ConjscanError
from .problem import AngularMode, Problem

_GAUSS_T = np.array([0.5 - 0.5 * np.sqrt(0.6), 0.5, 0.5 + 0.5 * np.sqrt(0.6)])
_GAUSS_W = np.array([5.0, 8.0, 5.0]) / 18.0


@dataclass(frozen=True)
class Grid:
    n_nodes: int

    def __post_init__(self):
        if self.n_nodes < 16:
            raise ConjscanError("INVALID_GRID", "need at least 16 nodes", n_nodes=self.n_nodes)

    @property
    def h(self) -> float:
        return 1.0 / (self.n_nodes - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_nodes)


class SymmetricBandedMatrix:
    """Symmetric matrix kept as its lower band (row 0 = diagonal, row k = k-th subdiagonal)."""

    def __init__(self, bands: np.ndarray):
        bands = np.atleast_2d(np.asarray(bands, dtype=float))
        if not np.all(np.isfinite(bands)):
            raise ConjscanError("COEFFICIENT_EVALUATION_FAILURE", "non-finite matrix entry")
        self.bands = bands

    @classmethod
    def tridiagonal(cls, diag: np.ndarray, off: np.ndarray) -> "SymmetricBandedMatrix":
        bands = np.zeros((2, len(diag)))
        bands[0] = diag
        bands[1, :-1] = off
        return cls(bands)

    @property
    def order(self) -> int:
        return self.bands.shape[1]

    @property
    def bandwidth(self) -> int:
        return self.bands.shape[0] - 1

    @property
    def diag(self) -> np.ndarray:
        return self.bands[0]

    @property
    def off(self) -> np.ndarray:
        return self.bands[1, :-1]

    def to_dense(self) -> np.ndarray:
        n = self.order
        out = np.diag(self.bands[0])
        for k in range(1, self.bandwidth + 1):
            sub = self.bands[k, : n - k]
            out += np.diag(sub, -k) + np.diag(sub, k)
        return out

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.bands[0] * v
        for k in range(1, self.bandwidth + 1):
            sub = self.bands[k, : self.order - k]
            out[k:] += sub * v[:-k]
            out[:-k] += sub * v[k:]
        return out

    def quadratic(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(u @ self.matvec(v))

    def norm(self) -> float:
        """Infinity norm (max absolute row sum); equals the 1-norm by symmetry."""
        rows = np.abs(self.bands[0]).copy()
        for k in range(1, self.bandwidth + 1):
            sub = np.abs(self.bands[k, : self.order - k])
            rows[k:] += sub
            rows[:-k] += sub
        return float(rows.max())

    def combine(self, other: "SymmetricBandedMatrix", alpha: float = 1.0, beta: float = 1.0):
        """``alpha * self + beta * other`` for matrices of equal shape."""
        return SymmetricBandedMatrix(alpha * self.bands + beta * other.bands)

    def to_triplets(self) -> list[tuple[int, int, float]]:
        out = []
        for k in range(self.bandwidth + 1):
            for i in range(self.order - k):
                value = float(self.bands[k, i])
                out.append((i + k, i, value))
                if k:
                    out.append((i, i + k, value))
        return sorted(out)

    def dump(self, path: str | Path) -> None:
        lines = [f"{i} {j} {v:.17g}" for i, j, v in self.to_triplets()]
        Path(path).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True)
class OperatorPencil:
    """``(K(r), M)``: the Hessian at radius ``r`` and the weighted mass matrix."""

    K: SymmetricBandedMatrix
    M: SymmetricBandedMatrix
    r: float
    grid: Grid
    first_node: int
    weight_power: int
    mode: AngularMode | None = None

    @property
    def order(self) -> int:
        return self.K.order

    def shifted(self, sigma: float) -> tuple[np.ndarray, np.ndarray]:
        """Diagonal and off-diagonal of ``K - sigma M``."""
        return self.K.diag - sigma * self.M.diag, self.K.off - sigma * self.M.off

    def to_nodal(self, c: np.ndarray) -> np.ndarray:
        """Nodal values on the full grid, zero at constrained nodes."""
        u = np.zeros(self.grid.n_nodes)
        u[self.first_node:self.first_node + self.order] = c
        return u


def _check_r(r: float) -> None:
    if not (0.0 < r <= 1.0):
        raise ConjscanError("PARAMETER_OUT_OF_RANGE", "radius must lie in (0, 1]", r=r)


def _layout(problem: Problem, mode: AngularMode | None) -> tuple[int, int, float]:
    """(first free node, weight power n-1, angular eigenvalue)."""
    if problem.kind == "interval":
        return 1, 0, 0.0
    if mode is None:
        raise ConjscanError("MODE_REQUIRED", "radial problems need an angular mode")
    first = 0 if mode.nu == 0 else 1
    return first, problem.dimension - 1, mode.angular_eigenvalue


@lru_cache(maxsize=64)
def _quadrature(n_nodes: int, weight_power: int):
    """Gauss points, weights*h*w(x), basis values at points and x^(n-3) factors."""
    h = 1.0 / (n_nodes - 1)
    left = np.linspace(0.0, 1.0, n_nodes)[:-1]
    xq = left[:, None] + h * _GAUSS_T[None, :]
    wq = h * _GAUSS_W[None, :] * xq**weight_power
    phi_l = np.broadcast_to(1.0 - _GAUSS_T, xq.shape)
    phi_r = np.broadcast_to(_GAUSS_T, xq.shape)
    return xq, wq, phi_l, phi_r, h


def _assemble(n_nodes: int, weight_power: int, first: int, kappa: float,
              stiff: np.ndarray | None, angular: np.ndarray | None, mass: np.ndarray | None):
    """Assemble the tridiagonal matrix of the weighted form on the free nodes.

    ``stiff``, ``angular``, ``mass`` are coefficient values at the Gauss points
    multiplying ``phi' phi'``, ``kappa phi phi / x^2`` and ``phi phi``.
    """
    xq, wq, pl, pr, h = _quadrature(n_nodes, weight_power)
    e00 = np.zeros(n_nodes - 1)
    e01 = np.zeros(n_nodes - 1)
    e11 = np.zeros(n_nodes - 1)
    if stiff is not None:
        s = (wq * stiff).sum(axis=1) / h**2
        e00 += s
        e11 += s
        e01 -= s
    zero_order = None
    if mass is not None:
        zero_order = wq * mass
    if angular is not None and kappa != 0.0:
        extra = kappa * wq * angular / xq**2
        zero_order = extra if zero_order is None else zero_order + extra
    if zero_order is not None:
        e00 += (zero_order * pl * pl).sum(axis=1)
        e01 += (zero_order * pl * pr).sum(axis=1)
        e11 += (zero_order * pr * pr).sum(axis=1)

    diag = np.zeros(n_nodes)
    diag[:-1] += e00
    diag[1:] += e11
    last = n_nodes - 1  # Dirichlet node at x = 1 is always constrained
    d = diag[first:last]
    o = e01[first:last - 1]
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(o))):
        raise ConjscanError("COEFFICIENT_EVALUATION_FAILURE", "quadrature produced a non-finite value")
    return SymmetricBandedMatrix.tridiagonal(d, o)


@lru_cache(maxsize=64)
def _mass(n_nodes: int, weight_power: int, first: int) -> SymmetricBandedMatrix:
    xq = _quadrature(n_nodes, weight_power)[0]
    return _assemble(n_nodes, weight_power, first, 0.0, None, None, np.ones_like(xq))


def mass_matrix(problem: Problem, mode: AngularMode | None, grid: Grid) -> SymmetricBandedMatrix:
    first, wp, _ = _layout(problem, mode)
    return _mass(grid.n_nodes, wp, first)


def assemble_operator(problem: Problem, mode: AngularMode | None, r: float, grid: Grid) -> OperatorPencil:
    """The pencil ``(K(r), M)`` of the Hessian at radius ``r``."""
    _check_r(r)
    first, wp, kappa = _layout(problem, mode)
    xq = _quadrature(grid.n_nodes, wp)[0]
    # non-finite values are reported by _assemble with a code, not as numpy warnings
    with np.errstate(all="ignore"):
        avals = problem.a(r * xq)
        fvals = problem.f(r * xq)
    K = _assemble(grid.n_nodes, wp, first, kappa, avals, avals, r * r * fvals)
    return OperatorPencil(K, _mass(grid.n_nodes, wp, first), float(r), grid, first, wp,
                          mode if problem.kind == "radial" else None)


def assemble_parameter_derivative(problem: Problem, mode: AngularMode | None, r: float,
                                  grid: Grid) -> SymmetricBandedMatrix:
    """Exact ``dK/dr`` of :func:`assemble_operator` (same quadrature, chain rule in ``r``)."""
    _check_r(r)
    first, wp, kappa = _layout(problem, mode)
    xq = _quadrature(grid.n_nodes, wp)[0]
    with np.errstate(all="ignore"):
        da = xq * problem.a.derivative(r * xq)
        dpot = 2.0 * r * problem.f(r * xq) + r * r * xq * problem.f.derivative(r * xq)
    return _assemble(grid.n_nodes, wp, first, kappa, da, da, dpot)
