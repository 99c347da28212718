import math

import numpy as np
import pytest

import isores as iso
from isores.errors import ConfigError, DomainError
from isores.potentials import (appendix_audit, asymmetric, custom, harmonic,
                               inverse_V_negative, inverse_V_positive, pinney,
                               potential_from_descriptor, sigma_map)


def test_pinney_values(pin):
    assert pin.v(0.0) == pytest.approx(0.0, abs=1e-15)
    assert pin.dv(0.0) == pytest.approx(0.0, abs=1e-15)
    assert pin.d2v(0.0) == pytest.approx(1.0, abs=1e-15)   # 1/4 + 3/4
    assert pin.dv(1.0) == pytest.approx(15.0 / 32.0, abs=1e-15)
    assert pin.v(1.0) == pytest.approx(9.0 / 32.0, abs=1e-15)


def test_harmonic_values():
    h = harmonic(2)
    assert h.v(3.0) == 18.0
    assert h.dv(3.0) == 12.0
    assert h.d2v(3.0) == 4.0
    assert h.n_iso == 2
    with pytest.raises(ConfigError):
        harmonic(0)


def test_asymmetric_values_and_convention():
    a = asymmetric(4.0, 4.0 / 9.0)
    assert a.v(2.0) == pytest.approx(8.0)
    assert a.v(-3.0) == pytest.approx(2.0)
    assert a.dv(2.0) == pytest.approx(8.0)
    assert a.dv(-3.0) == pytest.approx(-4.0 / 3.0)
    assert a.d2v(1.0) == 4.0
    assert a.d2v(-1.0) == pytest.approx(4.0 / 9.0)
    assert a.d2v(0.0) == 4.0          # convention: alpha at the kink
    assert a.n_iso == 1               # pi/2 + 3*pi/2 = 2*pi
    assert asymmetric(1.0, 1.0).n_iso == 1
    assert asymmetric(2.0, 3.0).n_iso is None


def test_domain_guard(pin):
    assert pin.v(-1.0 + 1e-6) > 1e6 * 0.1
    with pytest.raises(DomainError):
        pin.v(-1.0)
    with pytest.raises(DomainError):
        pin.dv(-1.0 + 1e-15)
    with pytest.raises(DomainError):
        pin.v(math.inf)


def test_restoring_sign_property(pin):
    for pot in (pin, harmonic(3), asymmetric(4.0, 4.0 / 9.0)):
        xs = np.concatenate([-np.logspace(-3, -0.5, 15), np.logspace(-3, 1.5, 15)])
        if pot.singular_left:
            xs = xs[xs > pot.domain_left + 1e-3]
        assert np.all(xs * pot.dv(xs) > 0)
        assert pot.v(0.0) == 0.0


def test_finite_difference_consistency(pin):
    xs = np.concatenate([-1 + np.logspace(-3, -0.31, 10), np.logspace(-2, 2, 12)])
    for x in xs:
        # step scaled to the distance from the asymptote so the truncation
        # term (h/(x+1))^2 stays far below the tolerance
        h = 1e-6 * min(1.0, 0.01 * (x + 1.0))
        dv_fd = (pin.v(x + h) - pin.v(x - h)) / (2 * h)
        d2v_fd = (pin.dv(x + h) - pin.dv(x - h)) / (2 * h)
        assert dv_fd == pytest.approx(pin.dv(x), rel=1e-6, abs=1e-8)
        assert d2v_fd == pytest.approx(pin.d2v(x), rel=1e-5, abs=1e-7)


def test_pinney_d2v_range(pin):
    xs = np.logspace(-4, 3, 50)
    vals = pin.d2v(xs)
    assert np.all(vals > 0.25) and np.all(vals <= 1.0)
    xs_neg = -1 + np.logspace(-4, -0.01, 40)
    assert np.all(pin.d2v(xs_neg) > 0)


def _bisect_sigma(pin, x, tol=1e-13):
    # independent oracle: plain bisection of V(s) = V(x) on (-1, 0)
    target = pin.v(x)
    lo, hi = -1 + 1e-12, -1e-14
    assert pin.v(lo) > target
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if pin.v(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def test_sigma_map_examples(pin):
    # x -> 0+ continuity
    assert abs(sigma_map(pin, 1e-8)) < 1e-6
    # x = 1: bisection oracle (and the algebraic value -x/(x+1))
    s1 = sigma_map(pin, 1.0)
    assert s1 == pytest.approx(_bisect_sigma(pin, 1.0), abs=1e-11)
    assert s1 == pytest.approx(-0.5, abs=1e-12)
    # x = 100: asymptotically -1 + 1/(x+1)
    s100 = sigma_map(pin, 100.0)
    assert s100 == pytest.approx(_bisect_sigma(pin, 100.0), abs=1e-11)
    assert abs(s100 - (-1.0 + 1.0 / 101.0)) < 1e-3


def test_sigma_map_level_and_monotonicity(pin):
    xs = np.logspace(-2, 2, 25)
    sig = np.array([sigma_map(pin, x) for x in xs])
    for x, s in zip(xs, sig):
        assert pin.v(s) == pytest.approx(pin.v(x), rel=1e-11, abs=1e-13)
    assert np.all(np.diff(sig) < 0)
    with pytest.raises(DomainError):
        sigma_map(iso.harmonic(1), 1.0)
    with pytest.raises(DomainError):
        sigma_map(pin, -1.0)


def test_appendix_audit_examples(pin):
    audit = appendix_audit(pin, [0.5, 1.0, 2.0, 10.0])
    assert np.all(np.abs(audit.iso_residuals) <= 1e-9)
    assert audit.slope_limit == pytest.approx(0.25)
    a100 = appendix_audit(pin, [100.0])
    assert a100.slope_defects[0] == pytest.approx(0.25 - 0.25 / 101.0 ** 3, abs=1e-9)
    # closed-form defect bound: |defect - 1/4| = 1/(4 (x+1)^3) exactly
    xs = np.array([0.5, 1.0, 2.0, 10.0, 100.0])
    audit = appendix_audit(pin, xs)
    assert np.allclose(np.abs(audit.slope_defects - 0.25),
                       0.25 / (xs + 1.0) ** 3, rtol=1e-9)
    # and -> 1/4 monotonically
    assert np.all(np.diff(audit.slope_defects) > 0)


def test_appendix_audit_near_zero(pin):
    audit = appendix_audit(pin, [1e-6])
    assert audit.slope_defects[0] == pytest.approx(0.0, abs=1e-5)


def test_inverse_level_helpers(pin):
    e = pin.v(2.5)
    assert inverse_V_positive(pin, e) == pytest.approx(2.5, rel=1e-12)
    s = inverse_V_negative(pin, e)
    assert pin.v(s) == pytest.approx(e, rel=1e-12)
    h = harmonic(2)
    assert inverse_V_negative(h, 2.0) == pytest.approx(-1.0, rel=1e-12)


def test_custom_potential_requires_isochrony_flag():
    pot = custom(v=lambda x: 0.5 * np.asarray(x) ** 2,
                 dv=lambda x: np.asarray(x),
                 d2v=lambda x: np.ones_like(np.asarray(x, dtype=float)))
    with pytest.raises(ConfigError):
        pot.require_isochronous()


def test_descriptor_round_trip():
    from isores.potentials import potential_to_descriptor
    for d in ({"kind": "harmonic", "n": 2}, {"kind": "pinney"},
              {"kind": "asymmetric", "alpha": 4.0, "beta": 4.0 / 9.0}):
        pot = potential_from_descriptor(d)
        back = potential_to_descriptor(pot)
        assert back["kind"] == d["kind"]
        assert potential_from_descriptor(back).kind == pot.kind
    with pytest.raises(ConfigError):
        potential_from_descriptor({"kind": "harmonic"})
    with pytest.raises(ConfigError):
        potential_from_descriptor({"kind": "mystery"})
