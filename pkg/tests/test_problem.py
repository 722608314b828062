import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conjscan import AngularMode, CoefficientField, ConjscanError, Nonlinearity, interval_problem, radial_problem, validate
from conjscan.fields import parse_expression


def test_expression_field_and_derivative():
    fld = CoefficientField.from_expression("1 + x**2 + sin(pi*x)")
    xs = np.linspace(0, 1, 11)
    assert np.allclose(fld(xs), 1 + xs**2 + np.sin(np.pi * xs))
    assert np.allclose(fld.derivative(xs), 2 * xs + np.pi * np.cos(np.pi * xs))
    assert fld(0.5).shape == ()


def test_constant_field_broadcasts():
    fld = CoefficientField.constant(-3.0)
    assert fld.is_constant
    assert np.array_equal(fld(np.zeros(5)), np.full(5, -3.0))
    assert np.array_equal(fld.derivative(np.zeros(5)), np.zeros(5))


@pytest.mark.parametrize("text", ["__import__('os')", "x.real", "abs(x)", "y + 1", "lambda: 1",
                                  "sin(x, x)", "[x]"])
def test_expression_grammar_rejects(text):
    with pytest.raises(ConjscanError) as err:
        parse_expression(text)
    assert err.value.code == "EXPRESSION_SYNTAX"


def test_rho_alias_and_pow():
    a = CoefficientField.from_expression("pow(rho, 2) + exp(0*rho)")
    assert a(0.5) == pytest.approx(1.25)


def test_table_reproduces_samples():
    values = np.cos(3 * np.linspace(0, 1, 17)) + 2
    fld = CoefficientField.from_table(values)
    assert np.allclose(fld(np.linspace(0, 1, 17)), values, atol=1e-14, rtol=0)


def test_tabulation_matches_closed_form():
    fld = CoefficientField.from_expression("2 + sin(7*x) * exp(x)")
    tab = fld.tabulate(2001)
    xs = np.linspace(0, 1, 9973)
    assert np.abs(tab(xs) - fld(xs)).max() <= 1e-6


def test_c0_field_has_no_derivative():
    fld = CoefficientField.from_table([1, 2, 1, 2], smoothness="C0")
    with pytest.raises(ConjscanError) as err:
        fld.derivative(0.3)
    assert err.value.code == "DERIVATIVE_UNAVAILABLE"


def test_nonlinearity_linearization():
    g = Nonlinearity.from_expression("-7*u + u**3 + x*u**2")
    assert g.g(0.3, 0.0) == 0.0
    assert g.dg_dxi(0.3, 0.0) == pytest.approx(-7.0)
    assert g.linearization()(0.5) == pytest.approx(-7.0)


def test_multiplicity_weights():
    assert [AngularMode(nu, 2).multiplicity_weight for nu in range(4)] == [1, 2, 2, 2]
    # dimension of spherical harmonics of degree nu on S^2
    assert [AngularMode(nu, 3).multiplicity_weight for nu in range(4)] == [1, 3, 5, 7]
    assert AngularMode(2, 3).angular_eigenvalue == 6.0


def test_validate_examples():
    assert validate(interval_problem(1.0, 0.0)).passed
    bad = validate(interval_problem(-1.0, 0.0))
    assert bad.codes == ["ELLIPTICITY_VIOLATION"]
    assert len(bad.issues[0].points) == 2001
    c = 12.5
    assert validate(interval_problem(1.0, -c, f"-{c}*u + u**3")).passed


def test_validate_trivial_branch_and_linearization():
    assert validate(interval_problem(1.0, 0.0, "u + 1")).codes[0] == "TRIVIAL_BRANCH_VIOLATION"
    assert "LINEARIZATION_MISMATCH" in validate(interval_problem(1.0, -2.0, "-3*u + u**3")).codes


def test_validate_is_deterministic():
    p = interval_problem("1 - 2*x", "x")
    assert validate(p).format() == validate(p).format()
    assert "ELLIPTICITY_VIOLATION" in validate(p).format()


def test_radial_mode_list_checks():
    with pytest.raises(ConjscanError) as err:
        radial_problem(2, 1.0, -30.0, modes=(0, 2, 1))
    assert err.value.code == "INVALID_MODES"
    with pytest.raises(ConjscanError):
        radial_problem(2, 1.0, -30.0, modes=(1, 1))
    assert [m.nu for m in radial_problem(2, 1.0, 0.0, modes=()).modes] == [0]


def test_digest_depends_on_content():
    assert interval_problem(1.0, -1.0).digest() == interval_problem(1.0, -1.0).digest()
    assert interval_problem(1.0, -1.0).digest() != interval_problem(1.0, -2.0).digest()


@settings(max_examples=40, deadline=None)
@given(st.floats(-50, 50), st.floats(0.1, 5), st.floats(0, 1))
def test_expression_evaluation_is_finite(c, k, x):
    fld = CoefficientField.from_expression(f"{c!r} * cos({k!r}*x) + exp(-x)")
    v = fld(x)
    assert math.isfinite(float(v))
    assert float(v) == pytest.approx(c * math.cos(k * x) + math.exp(-x), rel=1e-12, abs=1e-12)
