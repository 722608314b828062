import math

import numpy as np
import pytest
import scipy.linalg

from conjscan import ConjscanError, Grid, assemble_operator, assemble_parameter_derivative, interval_problem, radial_problem
from conjscan.assembly import SymmetricBandedMatrix, mass_matrix
from conjscan.inertia import pencil_inertia, smallest_eigenvalues

import oracles

C_DEMO = (2.5 * math.pi) ** 2


def dense_eigs(pencil, k):
    return scipy.linalg.eigh(pencil.K.to_dense(), pencil.M.to_dense(), eigvals_only=True,
                             subset_by_index=[0, k - 1])


def test_grid_bounds():
    g = Grid(16)
    assert g.nodes[0] == 0.0 and g.nodes[-1] == 1.0 and np.all(np.diff(g.nodes) > 0)
    with pytest.raises(ConjscanError):
        Grid(15)


def test_laplacian_stiffness_is_second_difference():
    grid = Grid(101)
    for r in (0.2, 1.0):
        K = assemble_operator(interval_problem(1.0, 0.0), None, r, grid).K
        n = grid.n_nodes - 2
        expected = (2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)) / grid.h
        assert np.allclose(K.to_dense(), expected, atol=1e-9)
        inertia = pencil_inertia(assemble_operator(interval_problem(1.0, 0.0), None, r, grid), 0.0)
        assert (inertia.n_neg, inertia.n_zero, inertia.n_pos) == (0, 0, n)


def test_mass_matrix_is_positive_definite():
    p = radial_problem(3, 1.0, 0.0, (0, 1))
    for mode in (None, p.mode(0), p.mode(1)):
        prob = interval_problem() if mode is None else p
        M = mass_matrix(prob, mode, Grid(64)).to_dense()
        assert np.all(np.linalg.eigvalsh(M) > 0)


def test_interval_demo_has_two_negative_eigenvalues():
    pencil = assemble_operator(interval_problem(1.0, -C_DEMO), None, 1.0, Grid(2001))
    assert pencil_inertia(pencil, 0.0).n_neg == 2


def test_radial_nu1_first_eigenvalue_is_bessel_zero_squared():
    j11 = oracles.bessel_zeros(1.0, 1)[0]
    p = radial_problem(2, 1.0, 0.0, (0, 1))
    lam = smallest_eigenvalues(assemble_operator(p, p.mode(1), 1.0, Grid(2001)), 1)[0]
    assert abs(lam / j11**2 - 1) < 1e-3


@pytest.mark.parametrize("dimension", [2, 3, 4])
def test_radial_first_eigenvalues_converge_to_bessel_zeros(dimension):
    # separated eigenfunctions involve J_(nu + n/2 - 1); error must shrink like h^2
    p = radial_problem(dimension, 1.0, 0.0, (0, 1, 2))
    for nu in (0, 1, 2):
        z = oracles.bessel_zeros(nu + dimension / 2 - 1, 1)[0]
        errs = [abs(smallest_eigenvalues(assemble_operator(p, p.mode(nu), 1.0, Grid(n)), 1)[0] / z**2 - 1)
                for n in (501, 1001)]
        assert errs[1] < 1e-6
        assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_parameter_out_of_range_and_missing_mode():
    p = interval_problem(1.0, 0.0)
    for r in (0.0, -0.1, 1.5):
        with pytest.raises(ConjscanError) as err:
            assemble_operator(p, None, r, Grid(32))
        assert err.value.code == "PARAMETER_OUT_OF_RANGE"
    with pytest.raises(ConjscanError) as err:
        assemble_operator(radial_problem(2, 1.0, 0.0), None, 0.5, Grid(32))
    assert err.value.code == "MODE_REQUIRED"


def test_non_finite_coefficient_is_reported():
    p = interval_problem(1.0, "exp(1000*x)")
    with pytest.raises(ConjscanError) as err:
        assemble_operator(p, None, 1.0, Grid(17))
    assert err.value.code == "COEFFICIENT_EVALUATION_FAILURE"


def test_derivative_vanishes_for_laplacian():
    kd = assemble_parameter_derivative(interval_problem(1.0, 0.0), None, 0.7, Grid(64))
    assert np.abs(kd.to_dense()).max() == 0.0


@pytest.mark.parametrize("radial", [False, True])
def test_derivative_of_constant_potential_is_scaled_mass(radial):
    c, r, grid = 17.0, 0.6, Grid(128)
    p = radial_problem(2, 1.0, -c, (0, 1)) if radial else interval_problem(1.0, -c)
    mode = p.mode(1) if radial else None
    kd = assemble_parameter_derivative(p, mode, r, grid).to_dense()
    M = mass_matrix(p, mode, grid).to_dense()
    assert np.allclose(kd, -2 * r * c * M, rtol=1e-13, atol=1e-13)


SMOOTH_PROBLEMS = [
    (interval_problem("1 + 0.5*sin(3*x)", "-40 + 10*cos(2*x)"), None),
    (interval_problem(1.0, -C_DEMO), None),
    (radial_problem(2, 1.0, -30.0, (0, 1, 2)), 0),
    (radial_problem(2, 1.0, -30.0, (0, 1, 2)), 2),
    (radial_problem(3, "8 + x**2", "-200*exp(-x)", (0, 1)), 1),
]


@pytest.mark.parametrize("problem,nu", SMOOTH_PROBLEMS)
def test_derivative_matches_central_differences(problem, nu):
    grid, delta = Grid(257), 1e-4
    mode = None if nu is None else problem.mode(nu)
    for r in (0.3, 0.75, 1.0 - delta):
        kp = assemble_operator(problem, mode, r + delta, grid).K.to_dense()
        km = assemble_operator(problem, mode, r - delta, grid).K.to_dense()
        kd = assemble_parameter_derivative(problem, mode, r, grid).to_dense()
        assert np.abs((kp - km) / (2 * delta) - kd).max() <= 1e-6 * max(1.0, np.abs(kd).max())


def test_tabulated_coefficients_assemble():
    fld = interval_problem("1 + 0.5*sin(3*x)", "-40 + 10*cos(2*x)")
    from conjscan.problem import Interval1DProblem
    tab = Interval1DProblem(fld.a.tabulate(), fld.f.tabulate())
    grid = Grid(301)
    a = assemble_operator(fld, None, 0.8, grid).K.to_dense()
    b = assemble_operator(tab, None, 0.8, grid).K.to_dense()
    assert np.abs(a - b).max() <= 1e-6 * np.abs(a).max()
    kd = assemble_parameter_derivative(tab, None, 0.8, grid).to_dense()
    assert np.all(np.isfinite(kd))


def test_symmetry_is_structural():
    p = radial_problem(2, "1 + x", "-30*cos(x)", (0, 1))
    K = assemble_operator(p, p.mode(1), 0.9, Grid(64)).K
    dense = K.to_dense()
    assert np.array_equal(dense, dense.T)
    v = np.arange(K.order, dtype=float)
    assert np.allclose(K.matvec(v), dense @ v)
    assert K.norm() == pytest.approx(np.abs(dense).sum(axis=1).max())


def test_banded_helpers(tmp_path):
    m = SymmetricBandedMatrix.tridiagonal(np.array([2.0, 3.0, 4.0]), np.array([-1.0, 0.5]))
    assert m.bandwidth == 1 and m.order == 3
    both = m.combine(m, 2.0, -1.0)
    assert np.allclose(both.to_dense(), m.to_dense())
    m.dump(tmp_path / "k.txt")
    lines = (tmp_path / "k.txt").read_text().splitlines()
    assert len(lines) == 7 and lines[0] == "0 0 2"
    with pytest.raises(ConjscanError):
        SymmetricBandedMatrix(np.array([[1.0, np.nan]]))


def test_eigenvalue_convergence_is_second_order():
    # pencil eigenvalue k approaches (k pi)^2 - c; error ratio per doubling near 4
    c = C_DEMO
    p = interval_problem(1.0, -c)
    errs = []
    for n in (500, 1000):
        eig = dense_eigs(assemble_operator(p, None, 1.0, Grid(n)), 3)
        errs.append(np.abs(eig - (np.arange(1, 4) * math.pi) ** 2 + c))
    ratio = errs[0] / errs[1]
    assert np.all((ratio >= 3.5) & (ratio <= 4.5))
