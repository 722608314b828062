import math

import numpy as np
import pytest

from conjscan import (ConjscanError, Grid, branch_radii, branch_radius, interval_problem, radial_problem, shoot,
                      scan_conjugate_instants, verify_bifurcation_theorem)

OMEGA = 2.5 * math.pi
C_DEMO = OMEGA**2
LINEAR = interval_problem(1.0, -C_DEMO, g=f"-{C_DEMO!r}*u")
CUBIC = interval_problem(1.0, -C_DEMO, g=f"-{C_DEMO!r}*u + u**3")
QUADRATIC = interval_problem(1.0, -C_DEMO, g=f"-{C_DEMO!r}*u + u**2")


def linear_amplitude(s, r):
    # sqrt of int_0^r (s cos(omega x))^2 dx
    return abs(s) * math.sqrt(r / 2 + math.sin(2 * OMEGA * r) / (4 * OMEGA))


def test_trivial_branch():
    state = shoot(CUBIC, 0.6, 0.0)
    assert (state.value, state.derivative, state.amplitude) == (0.0, 0.0, 0.0)
    assert branch_radius(CUBIC, 0.0) is None


@pytest.mark.parametrize("s", [1e-2, 1e-3, -1e-4])
def test_linear_shooting_matches_sine(s):
    for r in (0.4, 0.8):
        state = shoot(LINEAR, r, s)
        assert abs(state.value) <= 1e-8 * abs(s)
        assert state.amplitude == pytest.approx(linear_amplitude(s, r), rel=1e-8)
    state = shoot(LINEAR, 0.3, s)
    assert state.value == pytest.approx(s * math.sin(OMEGA * 0.3) / OMEGA, rel=1e-8)
    assert state.derivative == pytest.approx(s * math.cos(OMEGA * 0.3), rel=1e-7)


def test_unit_slope_terminal_value():
    assert abs(shoot(LINEAR, 0.4, 1.0).value) <= 1e-8
    assert branch_radius(LINEAR, 1.0) == pytest.approx(0.4, abs=1e-9)


def test_linear_radii_do_not_depend_on_slope():
    radii = [branch_radii(LINEAR, s) for s in (1e-2, 1e-3, 1e-4)]
    for rs in radii:
        assert np.allclose(rs, [0.4, 0.8], atol=1e-9)
    scanned = [c.r0 for c in scan_conjugate_instants(LINEAR, Grid(2001))]
    assert np.allclose(radii[-1], scanned, atol=1e-6)


def test_cubic_radii_converge_with_shrinking_amplitude():
    schedule = (1e-1, 2e-2, 4e-3, 8e-4)
    errors, amps = [], []
    for s in schedule:
        r = branch_radius(CUBIC, s)
        errors.append(abs(r - 0.4))
        amps.append(shoot(CUBIC, r, s).amplitude)
    assert all(b < a for a, b in zip(amps, amps[1:]))
    assert all(b <= a for a, b in zip(errors, errors[1:]))
    assert errors[-1] < 1e-6


def test_bifurcation_cubic_demo():
    scan = scan_conjugate_instants(CUBIC, Grid(2001))
    rep = verify_bifurcation_theorem(CUBIC, scan)
    assert rep.holds and rep.count == 2
    assert np.allclose(rep.limits, [0.4, 0.8], atol=1e-6)
    assert rep.matched == {1: 0, 2: 1}
    assert rep.amplitudes_decreasing and rep.radii_converging
    for k in (1, 2):
        amps = [p.amplitude for p in rep.points if p.k == k]
        assert len(amps) == 3 and all(a >= 5 * b for a, b in zip(amps, amps[1:]))
    assert set(rep.to_dict()) >= {"limits", "tolerances", "matched", "issues"}


def test_quadratic_nonlinearity_has_same_limits():
    rep = verify_bifurcation_theorem(QUADRATIC, [0.4, 0.8])
    assert rep.holds and np.allclose(rep.limits, [0.4, 0.8], atol=1e-6)


def test_no_potential_no_branches():
    problem = interval_problem(1.0, 0.0, g="u**3")
    assert branch_radii(problem, 1e-3) == []
    rep = verify_bifurcation_theorem(problem, [])
    assert rep.count == 0 and rep.holds


def test_misplaced_instants_are_flagged():
    rep = verify_bifurcation_theorem(CUBIC, [0.55])
    assert "CONVERSE_VIOLATION" in rep.issues and "THEOREM_VIOLATION" in rep.issues
    assert not rep.holds
    with pytest.raises(ConjscanError) as err:
        verify_bifurcation_theorem(CUBIC, [0.55], strict=True)
    assert err.value.code == "CONVERSE_VIOLATION"
    # a missing instant alone is only a theorem violation
    rep = verify_bifurcation_theorem(CUBIC, [0.4, 0.8, 0.95])
    assert rep.issues == ["THEOREM_VIOLATION"]


def test_blowup_is_reported():
    with pytest.raises(ConjscanError) as err:
        shoot(interval_problem(1.0, 0.0, g="1000*u**3"), 1.0, 100.0)
    assert err.value.code == "SHOOT_BLOWUP"


def test_input_validation():
    with pytest.raises(ConjscanError) as err:
        shoot(radial_problem(2, 1.0, -30.0, (0,), g="u**3"), 0.5, 1e-3)
    assert err.value.code == "UNSUPPORTED_PROBLEM"
    with pytest.raises(ConjscanError) as err:
        shoot(interval_problem(1.0, -C_DEMO), 0.5, 1e-3)
    assert err.value.code == "NONLINEARITY_REQUIRED"
    for r in (0.0, 1.2):
        with pytest.raises(ConjscanError) as err:
            shoot(CUBIC, r, 1e-3)
        assert err.value.code == "PARAMETER_OUT_OF_RANGE"
    with pytest.raises(ConjscanError) as err:
        verify_bifurcation_theorem(CUBIC, [0.4], s_schedule=(1e-2, 0.0))
    assert err.value.code == "INVALID_SCHEDULE"
