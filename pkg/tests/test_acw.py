import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isores.errors import NumericsError
from isores.acw import (AcwState, acw_first_integral, acw_numeric_check,
                        acw_orbit, acw_exact_orbit, acw_poincare, phi_lambda,
                        pinney_unit_solution, two_piece_map, write_acw_csv)

states = st.builds(AcwState,
                   x=st.floats(0.1, 10.0, allow_nan=False),
                   y=st.floats(-5.0, 5.0, allow_nan=False))
cs = st.floats(0.05, 20.0, allow_nan=False)


def test_phi_lambda_examples():
    assert phi_lambda(1.0, AcwState(1.0, 0.0)) == AcwState(1.0, 0.0)
    out = phi_lambda(4.0, AcwState(1.0, 0.0))
    assert out.x == pytest.approx(2.0) and out.y == 0.0
    out2 = phi_lambda(1.0, AcwState(2.0, 0.0))
    assert out2.x == pytest.approx(0.5, abs=1e-15)
    # cross-check against the explicit solution at t = pi/2
    assert pinney_unit_solution(1.0, AcwState(2.0, 0.0), math.pi / 2) == \
        pytest.approx(0.5, abs=1e-12)
    with pytest.raises(NumericsError):
        phi_lambda(-1.0, AcwState(1.0, 0.0))
    with pytest.raises(NumericsError):
        AcwState(0.0, 1.0)


def test_poincare_examples():
    out = acw_poincare(4.0, AcwState(1.0, 0.0))
    assert out.x == pytest.approx(2.0) and out.y == 0.0
    s = AcwState(1.7, -0.6)
    ident = acw_poincare(1.0, s)
    assert ident.x == s.x and ident.y == s.y          # c = 1: exact identity
    out9 = acw_poincare(9.0, AcwState(1.0, 1.0))
    assert out9.x == pytest.approx(math.sqrt(5.0), rel=1e-15)
    assert out9.y == pytest.approx(1.0 / math.sqrt(5.0), rel=1e-15)
    assert acw_first_integral(out9) == pytest.approx(1.0, rel=1e-14)


@given(cs, states)
@settings(max_examples=300, deadline=None)
def test_composition_identity(c, s):
    via_quarters = two_piece_map(1.0, c, s)
    direct = acw_poincare(c, s)
    assert via_quarters.x == pytest.approx(direct.x, rel=1e-12, abs=1e-13)
    assert via_quarters.y == pytest.approx(direct.y, rel=1e-12, abs=1e-13)


@given(cs, states)
@settings(max_examples=300, deadline=None)
def test_first_integral_invariance(c, s):
    i0 = acw_first_integral(s)
    assert acw_first_integral(acw_poincare(c, s)) == \
        pytest.approx(i0, rel=1e-12, abs=1e-13)
    # each quarter map flips the sign of x*y, so |x*y| is invariant
    assert abs(acw_first_integral(phi_lambda(c, s))) == \
        pytest.approx(abs(i0), rel=1e-12, abs=1e-13)


def test_orbit_geometric_growth():
    orbit = acw_orbit(4.0, AcwState(1.0, 0.0), 10)
    assert orbit[-1].x == pytest.approx(1024.0, rel=1e-12)
    xs = np.array([s.x for s in orbit])
    slope = np.polyfit(np.arange(11), np.log(xs), 1)[0]
    assert slope == pytest.approx(math.log(2.0), abs=1e-9)


def test_orbit_constant_at_c1():
    orbit = acw_orbit(1.0, AcwState(1.0, 1.0), 100)
    assert all(s.x == 1.0 and s.y == 1.0 for s in orbit)


def test_orbit_velocity_growth_below_one():
    s0 = AcwState(1.0, 1.0)
    pi_factor = math.sqrt((1.0 + 0.25) / 2.0)
    orbit = acw_orbit(0.25, s0, 20)
    ys = np.array([s.y for s in orbit])
    assert pi_factor < 1
    assert ys[-1] == pytest.approx(pi_factor ** -20, rel=1e-10)


def test_orbit_matches_exact_form():
    s0 = AcwState(1.3, -0.8)
    n = 30
    orbit = acw_orbit(2.5, s0, n)
    exact = acw_exact_orbit(2.5, s0, n)
    for k, (a, b) in enumerate(zip(orbit, exact)):
        assert a.x == pytest.approx(b.x, rel=1e-10 * max(k, 1))
        assert a.y == pytest.approx(b.y, rel=1e-10 * max(k, 1))


def test_numeric_check_examples(cfg):
    chk = acw_numeric_check(4.0, AcwState(1.0, 0.0), cfg)
    assert chk.max_err <= 1e-6
    assert chk.numeric.x == pytest.approx(2.0, abs=1e-6)
    chk2 = acw_numeric_check(1.0, AcwState(1.5, -0.2), cfg)
    assert chk2.max_err <= 1e-8          # pi-periodic free system
    chk3 = acw_numeric_check(4.0, AcwState(1.0, 1.0), cfg)
    assert chk3.max_err <= 1e-6
    assert chk3.analytic.x == pytest.approx(math.sqrt(5.0 / 2.0), rel=1e-14)


def test_numeric_check_sample_grid(cfg):
    for c in (0.25, 1.0, 4.0):
        for x0 in np.linspace(0.5, 3.0, 5):
            for y0 in np.linspace(-2.0, 2.0, 5):
                chk = acw_numeric_check(c, AcwState(float(x0), float(y0)), cfg)
                assert chk.max_err <= 1e-6


def test_two_piece_generalization(cfg):
    # r1 = r2 = lam: the period map of the autonomous equation with that lam
    s = AcwState(1.4, 0.7)
    out = two_piece_map(3.0, 3.0, s)
    # autonomous pinney with lam=3 is pi-periodic: period map is identity
    assert out.x == pytest.approx(s.x, rel=1e-12)
    assert out.y == pytest.approx(s.y, rel=1e-12)


def test_acw_csv(tmp_path):
    orbit = acw_orbit(4.0, AcwState(1.0, 0.0), 10)
    p = write_acw_csv(orbit, tmp_path / "orbit.csv")
    lines = p.read_text().splitlines()
    assert lines[0] == "n,x,y,xy"
    assert lines[-1].startswith("10,1024,")
