"""Finite-dimensional test bed: C^1 paths of symmetric matrices.

Here every statement about crossings can be checked against a dense
eigendecomposition: crossing forms and their signatures, the Morse-index
jump formula, and the local lower bound ``|L(t) u| >= C |t - t0| |u|``
around a regular crossing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
from scipy.optimize import brentq, minimize_scalar

from .assembly import Grid, assemble_operator, assemble_parameter_derivative
from .crossing import crossing_signature
from .errors import ConjscanError

MatrixFn = Callable[[float], np.ndarray]


@dataclass(frozen=True)
class MatrixPath:
    dimension: int
    evaluator: MatrixFn
    derivative: MatrixFn
    provenance: str = "closed-form"
    seed: int | None = None

    def __post_init__(self):
        if not (2 <= self.dimension <= 64):
            raise ConjscanError("INVALID_DIMENSION", "path dimension must lie in [2, 64]",
                                dimension=self.dimension)

    def __call__(self, t: float) -> np.ndarray:
        return self.evaluator(t)

    def dot(self, t: float) -> np.ndarray:
        return self.derivative(t)

    def check(self, points=None, delta: float = 1e-4) -> None:
        """Raise ``INVALID_PATH`` unless symmetric and derivative-consistent at ``points``."""
        if points is None:
            points = np.linspace(delta, 1.0 - delta, 7)
        for t in points:
            L, D = self(t), self.dot(t)
            scale = max(1.0, np.abs(L).max())
            if np.abs(L - L.T).max() > 1e-12 * scale or np.abs(D - D.T).max() > 1e-12 * max(1.0, np.abs(D).max()):
                raise ConjscanError("INVALID_PATH", "path is not symmetric", t=float(t))
            fd = (self(t + delta) - self(t - delta)) / (2 * delta)
            if np.abs(fd - D).max() > 1e-6 * max(1.0, np.abs(D).max()):
                raise ConjscanError("INVALID_PATH", "derivative disagrees with central differences",
                                    t=float(t))


def diagonal_path(entries: list[Callable[[float], float]],
                  derivatives: list[Callable[[float], float]]) -> MatrixPath:
    """Closed-form diagonal path from scalar entry functions."""
    return MatrixPath(len(entries),
                      lambda t: np.diag([f(t) for f in entries]).astype(float),
                      lambda t: np.diag([f(t) for f in derivatives]).astype(float))


def _sym(rng: np.random.Generator, d: int) -> np.ndarray:
    g = rng.standard_normal((d, d))
    return (g + g.T) / 2.0


def random_path(seed: int, dimension: int, sweep: float = 4.0) -> MatrixPath:
    """``A0 + t A1 + sin(pi t) A2`` with symmetric Gaussian ``Ai``.

    ``A1`` is scaled by ``sweep`` so eigenvalue branches cross zero. If an
    endpoint is close to singular, ``A0`` is shifted by a growing multiple of
    the identity (scaling alone cannot change the relative gap at ``t = 0``).
    """
    rng = np.random.default_rng(seed)
    a0, a1, a2 = _sym(rng, dimension), sweep * _sym(rng, dimension), _sym(rng, dimension)

    def gap(m):
        w = np.linalg.eigvalsh(m)
        return np.abs(w).min() / max(np.abs(w).max(), 1e-300)

    unit = 0.05 * np.abs(np.linalg.eigvalsh(a0)).max()
    eye = np.eye(dimension)
    for k in range(200):
        shifted = a0 + k * unit * eye
        if min(gap(shifted), gap(shifted + a1)) > 1e-3:
            break
    else:
        raise ConjscanError("ENDPOINT_SINGULAR", "could not make endpoints invertible", seed=seed)
    a0 = shifted
    return MatrixPath(dimension,
                      lambda t: a0 + t * a1 + math.sin(math.pi * t) * a2,
                      lambda t: a1 + math.pi * math.cos(math.pi * t) * a2,
                      provenance="random-trigonometric", seed=seed)


def galerkin_path(problem, mode, n_nodes: int, r_min: float = 1e-3) -> MatrixPath:
    """The discretized Hessian path ``t -> M^-1/2 K(r(t)) M^-1/2`` with ``r = r_min + (1 - r_min) t``.

    Uses the Cholesky factor of ``M`` in place of the symmetric square root,
    which is a congruence and preserves inertia and kernels.
    """
    grid = Grid(n_nodes)
    first = assemble_operator(problem, mode, 1.0, grid)
    chol = np.linalg.cholesky(first.M.to_dense())
    span = 1.0 - r_min

    def whiten(a):
        tmp = scipy.linalg.solve_triangular(chol, a, lower=True)
        out = scipy.linalg.solve_triangular(chol, tmp.T, lower=True)
        return 0.5 * (out + out.T)

    def radius(t):
        return min(1.0, max(r_min * 0.5, r_min + span * t))

    return MatrixPath(first.order,
                      lambda t: whiten(assemble_operator(problem, mode, radius(t), grid).K.to_dense()),
                      lambda t: span * whiten(assemble_parameter_derivative(problem, mode, radius(t),
                                                                          grid).to_dense()),
                      provenance="galerkin")


def morse_count(m: np.ndarray) -> int:
    return int(np.sum(np.linalg.eigvalsh(m) < 0))


@dataclass
class MatrixCrossing:
    t0: float
    kernel: np.ndarray
    gamma: np.ndarray
    signature: int
    regular: bool

    @property
    def dim(self) -> int:
        return self.kernel.shape[1]


def _sigma_min(path: MatrixPath, t: float) -> float:
    return float(np.abs(np.linalg.eigvalsh(path(t))).min())


def find_crossings(path: MatrixPath, samples: int = 400, tol: float = 1e-8,
                   interval: tuple[float, float] = (0.0, 1.0),
                   regularity_tol: float = 1e-6) -> list[MatrixCrossing]:
    """All crossings in the open interval, each with its crossing form and signature.

    Sign changes of sorted eigenvalue branches are located with Brent's
    method; sampled near-minima of the smallest ``|eigenvalue|`` are polished
    by bounded minimization to catch touching (degenerate) crossings.
    """
    a, b = interval
    for t in (a, b):
        w = np.linalg.eigvalsh(path(t))
        if np.abs(w).min() <= tol * np.abs(w).max():
            raise ConjscanError("ENDPOINT_SINGULAR", "path is singular at an endpoint", t=t)

    ts = np.linspace(a, b, samples)
    eig = np.array([np.linalg.eigvalsh(path(t)) for t in ts])
    candidates: list[float] = []
    for j in range(path.dimension):
        branch = eig[:, j]
        for i in np.flatnonzero(np.sign(branch[:-1]) != np.sign(branch[1:])):
            if branch[i] == 0.0:
                candidates.append(float(ts[i]))
                continue
            candidates.append(brentq(lambda t: np.linalg.eigvalsh(path(t))[j], ts[i], ts[i + 1],
                                     xtol=1e-15, rtol=4 * np.finfo(float).eps))

    smin = np.abs(eig).min(axis=1)
    for i in range(1, samples - 1):
        if smin[i] <= smin[i - 1] and smin[i] <= smin[i + 1]:
            if any(ts[i - 1] <= c <= ts[i + 1] for c in candidates):
                continue
            res = minimize_scalar(lambda t: _sigma_min(path, t), bounds=(ts[i - 1], ts[i + 1]),
                                  method="bounded", options={"xatol": 1e-12})
            if res.fun <= tol * np.abs(eig[i]).max():
                candidates.append(float(res.x))

    candidates.sort()
    merged: list[float] = []
    for c in candidates:
        if merged and c - merged[-1] <= 1e-9:
            continue
        merged.append(c)

    out = []
    for t0 in merged:
        w, v = np.linalg.eigh(path(t0))
        ker = v[:, np.abs(w) <= tol * np.abs(w).max()]
        if ker.shape[1] == 0:
            raise ConjscanError("BRACKET_AMBIGUOUS", "refined crossing has no numerical kernel", t0=t0)
        gamma = ker.T @ path.dot(t0) @ ker
        gamma = 0.5 * (gamma + gamma.T)
        sig, regular = crossing_signature(gamma, regularity_tol)
        out.append(MatrixCrossing(t0, ker, gamma, sig, regular))
    return out


@dataclass
class MorseJump:
    lhs: int
    rhs: int | None
    holds: bool | None
    crossings: list[MatrixCrossing] = field(default_factory=list)
    skipped: str | None = None


def verify_morse_jump(path: MatrixPath, a: float = 0.0, b: float = 1.0, samples: int = 400) -> MorseJump:
    """Compare ``mu(L_a) - mu(L_b)`` with the summed crossing signatures on ``(a, b)``."""
    lhs = morse_count(path(a)) - morse_count(path(b))
    crossings = find_crossings(path, samples=samples, interval=(a, b))
    if any(not c.regular for c in crossings):
        return MorseJump(lhs, None, None, crossings, skipped="DEGENERATE_CROSSING")
    rhs = sum(c.signature for c in crossings)
    return MorseJump(lhs, rhs, lhs == rhs, crossings)


@dataclass(frozen=True)
class IsolationBound:
    epsilon: float
    constant: float
    holds: bool


def verify_isolation_bound(path: MatrixPath, t0: float, margin: float = 1e-6,
                           min_epsilon: float = 1e-4) -> IsolationBound:
    """Largest ``eps`` in 0.1, 0.05, ... for which sampled ``sigma_min(L_t) / |t - t0|`` stays above ``margin``.

    The 50 samples per candidate sit at distances ``eps * 2^-j`` (j = 0..24)
    on both sides, so a tangency at ``t0`` drives the ratio to zero.
    """
    eps = 0.1
    best_c = 0.0
    while eps >= min_epsilon:
        ratios = []
        for j in range(25):
            for s in (-1.0, 1.0):
                t = t0 + s * eps * 2.0**-j
                if 0.0 <= t <= 1.0:
                    ratios.append(_sigma_min(path, t) / abs(t - t0))
        c = min(ratios)
        best_c = max(best_c, c)
        if c > margin:
            return IsolationBound(eps, c, True)
        eps /= 2.0
    raise ConjscanError("ISOLATION_UNVERIFIED", "no window with a positive constant", t0=t0,
                        best_constant=best_c)


def lab_batch(seeds, dimensions=(4, 8, 16)) -> list[dict]:
    """Morse-jump verification over seeded random paths, one row per seed."""
    dims = list(dimensions)
    rows = []
    for i, seed in enumerate(seeds):
        d = dims[i % len(dims)]
        result = verify_morse_jump(random_path(seed, d))
        rows.append({"seed": seed, "d": d, "crossings": len(result.crossings), "lhs": result.lhs,
                     "rhs": result.rhs, "holds": result.holds})
    return rows
