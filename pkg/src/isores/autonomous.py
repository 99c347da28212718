"""Unforced dynamics of a potential center: orbits, the complex variational
solution, measured minimal periods, action-angle coordinates, the
Rofe-Beketov action derivative, the negative semi-period, rotation-argument
diagnostics, and large-action (bouncing) limit audits."""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import DomainError, NumericsError
from .forcing import TWO_PI
from .integrate import (IntegratorConfig, RawSolution, State, Trajectory,
                        integrate_autonomous, integrate_ode)
from .potentials import (PotentialSpec, inverse_V_negative, inverse_V_positive)


# ---------------------------------------------------------------------------
# closed forms (harmonic oscillator and the shifted Pinney potential)

def pinney_phi_closed(r, t):
    """Closed-form orbit of the Pinney center: position and velocity of the
    solution with x(0)=r, v(0)=0, written with lambda = 1 + r."""
    lam = 1.0 + float(r)
    t = np.asarray(t, dtype=float)
    c2 = np.cos(0.5 * t) ** 2
    s2 = np.sin(0.5 * t) ** 2
    q = lam ** 2 * c2 + lam ** -2 * s2
    root = np.sqrt(q)
    x = -1.0 + root
    v = (lam ** -2 - lam ** 2) * np.sin(t) / (4.0 * root)
    return x, v


def pinney_psi_closed(r, t):
    """Closed-form complex variational solution along the Pinney orbit of
    amplitude r (psi(0)=1, psi'(0)=i)."""
    lam = 1.0 + float(r)
    t = np.asarray(t, dtype=float)
    c2 = np.cos(0.5 * t) ** 2
    s2 = np.sin(0.5 * t) ** 2
    den = np.sqrt(c2 + lam ** -4 * s2)
    re = (c2 - lam ** -4 * s2) / den
    im = np.sin(t) / den
    return re + 1j * im


def pinney_psi_infinity(t):
    """Pointwise large-amplitude limit of the Pinney variational solution."""
    t = np.asarray(t, dtype=float)
    c = np.cos(0.5 * t)
    return np.abs(c) + 2j * np.sin(0.5 * t) * np.sign(c)


def closed_orbit(pot: PotentialSpec, r, t):
    """(x, v) of the orbit through (r, 0) when a closed form exists, else None."""
    if pot.kind == "harmonic":
        n = pot.params[0]
        t = np.asarray(t, dtype=float)
        return r * np.cos(n * t), -r * n * np.sin(n * t)
    if pot.kind == "pinney":
        return pinney_phi_closed(r, t)
    return None


def closed_psi(pot: PotentialSpec, r, t):
    """psi(t, r) when a closed form exists, else None."""
    if pot.kind == "harmonic":
        n = pot.params[0]
        t = np.asarray(t, dtype=float)
        return np.cos(n * t) + 1j * np.sin(n * t) / n
    if pot.kind == "pinney":
        return pinney_psi_closed(r, t)
    return None


# ---------------------------------------------------------------------------
# orbits and periods

class _ConstantInterp:
    def __init__(self, y):
        self._y = np.asarray(y, dtype=float)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return self._y.copy()
        return np.repeat(self._y[:, None], t.size, axis=1)


def _constant_trajectory(y, t0, t1):
    raw = RawSolution(np.array([t0, t1]), np.array([y, y]),
                      [(t0, t1, _ConstantInterp(y))], [],
                      {"n_steps": 0, "nfev": 0, "n_segments": 1})
    return Trajectory(raw)


@dataclass(frozen=True, eq=False)
class AutonomousOrbit:
    """One measured period of the unforced orbit through (r, 0)."""

    pot: PotentialSpec
    r: float
    period: float
    trajectory: Trajectory
    energy: float

    def eval(self, t):
        """(x, v) at any time, reduced modulo the measured period."""
        tau = np.mod(np.asarray(t, dtype=float), self.period)
        return self.trajectory.eval(tau)


def minimal_period(pot: PotentialSpec, r: float, cfg: IntegratorConfig) -> float:
    """First return time of the orbit through (r, 0) to the section
    {v = 0, x > 0}, refined on the dense output.

    Raises NumericsError if the orbit does not return within 10 periods of
    2*pi (non-oscillatory input).
    """
    if r <= 0:
        raise DomainError("minimal_period: r must be positive")
    pot.v(r)
    guess = TWO_PI / pot.n_iso if pot.n_iso else TWO_PI
    for horizon in (1.25 * guess, 10.0 * TWO_PI):
        traj = integrate_autonomous(pot, State(r, 0.0), 0.0, horizon, cfg)
        for ev in traj.events_of("v_zero"):
            if ev.t <= 1e-9:
                continue
            x_ev, _ = traj.eval(ev.t)
            if x_ev > 0:
                return float(ev.t)
    raise NumericsError(
        f"minimal_period: no return to the section within {10 * TWO_PI:.3f} "
        "time units; the motion does not look periodic")


def phi_orbit(pot: PotentialSpec, r: float, cfg: IntegratorConfig) -> AutonomousOrbit:
    """Numeric orbit through (r, 0) over one measured period (r >= 0)."""
    if r < 0:
        raise DomainError("phi_orbit: r must be nonnegative")
    if r == 0:
        period = TWO_PI / pot.n_iso if pot.n_iso else TWO_PI
        traj = _constant_trajectory([0.0, 0.0], 0.0, period)
        return AutonomousOrbit(pot, 0.0, period, traj, 0.0)
    period = minimal_period(pot, r, cfg)
    traj = integrate_autonomous(pot, State(r, 0.0), 0.0, period, cfg)
    return AutonomousOrbit(pot, float(r), period, traj, float(pot.v(r)))


# ---------------------------------------------------------------------------
# variational solutions

@dataclass(frozen=True, eq=False)
class VariationalSolution:
    """Fundamental complex solution psi = u + i*v of the linearization along
    the orbit of amplitude r: u(0)=1, u'(0)=0, v(0)=0, v'(0)=1."""

    pot: PotentialSpec
    r: float
    t1: float
    raw: RawSolution | None = None       # components (x, xdot, u, udot, v, vdot)
    lin_freq: float | None = None        # r = 0: explicit linearization

    def _parts(self, t):
        if self.raw is not None:
            return self.raw.eval(t)
        w = self.lin_freq
        t = np.asarray(t, dtype=float)
        zeros = np.zeros_like(t)
        return np.stack([zeros, zeros, np.cos(w * t), -w * np.sin(w * t),
                         np.sin(w * t) / w, np.cos(w * t)])

    def u(self, t):
        return self._parts(t)[2]

    def du(self, t):
        return self._parts(t)[3]

    def v(self, t):
        return self._parts(t)[4]

    def dv(self, t):
        return self._parts(t)[5]

    def psi(self, t):
        p = self._parts(t)
        return p[2] + 1j * p[4]

    def dpsi(self, t):
        p = self._parts(t)
        return p[3] + 1j * p[5]

    def wronskian(self, t):
        p = self._parts(t)
        return p[2] * p[5] - p[3] * p[4]

    def orbit_x(self, t):
        p = self._parts(t)
        return p[0]


def psi_solution(pot: PotentialSpec, r: float, cfg: IntegratorConfig,
                 t1: float = TWO_PI) -> VariationalSolution:
    """Numerically integrated variational pair along the orbit of amplitude r.

    r = 0 uses the explicit linearization at the center (frequency
    sqrt(V''(0))) instead of integrating a degenerate orbit.
    """
    if r < 0:
        raise DomainError("psi_solution: r must be nonnegative")
    if r == 0:
        w0 = math.sqrt(float(pot.d2v(0.0)))
        return VariationalSolution(pot, 0.0, t1, lin_freq=w0)
    pot.v(r)
    dv, d2v = pot._dv, pot._d2v
    clamp = pot.domain_left + 1e-13 if pot.singular_left else None

    def rhs(t, y):
        x = y[0]
        if clamp is not None and x < clamp:
            x = clamp
        a = float(d2v(x))
        return (y[1], -float(dv(x)), y[3], -a * y[2], y[5], -a * y[4])

    kink = (lambda t, y: y[0]) if pot.kink_at_zero else None
    guard = None
    if pot.singular_left:
        thresh = pot.domain_left + cfg.singularity_margin
        guard = ("singularity", lambda t, y: y[0] - thresh)
    raw = integrate_ode(rhs, [r, 0.0, 1.0, 0.0, 0.0, 1.0], 0.0, t1, cfg,
                        kink=kink, guard=guard)
    return VariationalSolution(pot, float(r), t1, raw=raw)


def psi_evaluator(pot: PotentialSpec, r: float, cfg: IntegratorConfig,
                  t1: float = TWO_PI):
    """Vectorized t -> psi(t, r), closed form when available else numeric."""
    if closed_psi(pot, r, np.zeros(1)) is not None and r > 0:
        return lambda t: closed_psi(pot, r, t)
    if r == 0:
        vs = psi_solution(pot, 0.0, cfg, t1)
        return vs.psi
    vs = psi_solution(pot, r, cfg, t1)
    return vs.psi


# ---------------------------------------------------------------------------
# action-angle machinery

@dataclass(frozen=True)
class ActionAngle:
    theta: float
    action: float


def _quad_checked(integrand, a, b, points=None, hard_tol=1e-5):
    """Adaptive quadrature whose convergence is judged by the achieved error
    estimate rather than QUADPACK's roundoff heuristics (near-center orbits
    hit the noise floor of E - V(x) long before 1e-12; the estimate is still
    orders of magnitude inside every stated tolerance)."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, abserr = quad(integrand, a, b, points=points,
                           epsabs=1e-12, epsrel=1e-11, limit=800)
    if abserr > hard_tol * max(1.0, abs(val)):
        raise NumericsError(
            f"quadrature failed: estimated error {abserr:.2e} on [{a}, {b}]")
    return val


def _area_integral(pot: PotentialSpec, energy: float, x_lo: float, x_hi: float) -> float:
    """integral over [x_lo, x_hi] of sqrt(2(E - V(x))) dx with the sine
    substitution that removes the square-root turning points."""
    c = 0.5 * (x_hi + x_lo)
    h = 0.5 * (x_hi - x_lo)

    def integrand(u):
        val = 2.0 * (energy - float(pot.v(c + h * math.sin(u))))
        return math.sqrt(max(val, 0.0)) * h * math.cos(u)

    points = None
    if pot.kink_at_zero and x_lo < 0.0 < x_hi:
        points = [math.asin(max(-1.0, min(1.0, -c / h)))]
    return _quad_checked(integrand, -0.5 * math.pi, 0.5 * math.pi,
                         points=points)


def action_of_amplitude(pot: PotentialSpec, r: float) -> float:
    """Action I(r) = (enclosed area)/(2*pi) of the orbit through (r, 0)."""
    if r < 0:
        raise DomainError("action_of_amplitude: r must be nonnegative")
    if r == 0:
        return 0.0
    energy = float(pot.v(r))
    x_lo = inverse_V_negative(pot, energy)
    return _area_integral(pot, energy, x_lo, float(r)) / math.pi


def amplitude_of_action(pot: PotentialSpec, action: float) -> float:
    """Inverse of action_of_amplitude for isochronous potentials, using
    Omega(I) = N*I = V(r)."""
    if action < 0:
        raise DomainError("amplitude_of_action: action must be nonnegative")
    if action == 0:
        return 0.0
    n = pot.require_isochronous()
    return inverse_V_positive(pot, n * action)


def to_action_angle(pot: PotentialSpec, s: State, cfg: IntegratorConfig) -> ActionAngle:
    """Action-angle coordinates of a phase point; the angle is the travel
    time from the section {v=0, x>0}, scaled by 2*pi/T."""
    e = 0.5 * s.v * s.v + float(pot.v(s.x))
    if e <= 0.0:
        raise DomainError("to_action_angle: the center has no angle")
    r = inverse_V_positive(pot, e)
    action = action_of_amplitude(pot, r)
    period = minimal_period(pot, r, cfg)
    if s.v == 0.0 and s.x > 0.0:
        return ActionAngle(0.0, action)
    # reversibility: the forward orbit from (x, -v) reaches (r, 0) at the
    # same travel time at which the original point was reached from (r, 0)
    traj = integrate_autonomous(pot, State(s.x, -s.v), 0.0, 1.25 * period, cfg)
    tau = None
    for ev in traj.events_of("v_zero"):
        if ev.t <= 1e-9:
            continue
        x_ev, _ = traj.eval(ev.t)
        if x_ev > 0:
            tau = float(ev.t)
            break
    if tau is None:
        raise NumericsError("to_action_angle: section return not found")
    return ActionAngle(math.fmod(TWO_PI * tau / period, TWO_PI), action)


def from_action_angle(pot: PotentialSpec, aa: ActionAngle,
                      cfg: IntegratorConfig) -> State:
    """Phase point with the given action and angle (inverse of
    to_action_angle up to integration tolerance)."""
    if aa.action <= 0:
        raise DomainError("from_action_angle: action must be positive")
    r = amplitude_of_action(pot, aa.action)
    period = minimal_period(pot, r, cfg)
    theta = math.fmod(aa.theta, TWO_PI)
    if theta < 0:
        theta += TWO_PI
    tau = theta / TWO_PI * period
    if tau == 0.0:
        return State(float(r), 0.0)
    traj = integrate_autonomous(pot, State(float(r), 0.0), 0.0, tau, cfg)
    return traj.end_state()


# ---------------------------------------------------------------------------
# Rofe-Beketov derivative with respect to the action

def _rofe_raw(pot: PotentialSpec, r: float, t_max: float, cfg: IntegratorConfig):
    dv, d2v = pot._dv, pot._d2v
    clamp = pot.domain_left + 1e-13 if pot.singular_left else None

    def rhs(t, y):
        x = y[0]
        if clamp is not None and x < clamp:
            x = clamp
        acc = -float(dv(x))
        v2, a2 = y[1] * y[1], acc * acc
        w = (1.0 - float(d2v(x))) * (v2 - a2) / (v2 + a2) ** 2
        return (y[1], acc, w)

    kink = (lambda t, y: y[0]) if pot.kink_at_zero else None
    guard = None
    if pot.singular_left:
        thresh = pot.domain_left + cfg.singularity_margin
        guard = ("singularity", lambda t, y: y[0] - thresh)
    return integrate_ode(rhs, [r, 0.0, 0.0], 0.0, t_max, cfg, kink=kink, guard=guard)


def dx_dI_rofe_beketov(pot: PotentialSpec, r: float, t_grid,
                       cfg: IntegratorConfig):
    """dx/dI along the orbit of amplitude r at the given times, via the
    closed-form combination of xdot, xddot and the accumulated integral of
    (1 - V''(x)) (xdot^2 - xddot^2) / (xdot^2 + xddot^2)^2.

    The derivative is even in t; negative grid times are mapped to |t|.
    """
    n = pot.require_isochronous()
    if r <= 0:
        raise DomainError("dx_dI_rofe_beketov: r must be positive")
    t = np.abs(np.asarray(t_grid, dtype=float))
    raw = _rofe_raw(pot, float(r), float(np.max(t)) if np.max(t) > 0 else 1e-9, cfg)
    out = np.empty(t.shape)
    flat = t.ravel()
    vals = raw.eval(flat) if flat.size else np.empty((3, 0))
    x, v, w = vals
    acc = -np.asarray(pot.dv(x))
    out = (n * (-acc / (v * v + acc * acc) + v * w)).reshape(t.shape)
    return out


# ---------------------------------------------------------------------------
# negative semi-period

def negative_semiperiod(pot: PotentialSpec, action: float) -> float:
    """Time per period spent at x < 0 by the orbit of the given action:
    sqrt(2) * integral over (r_-, 0) of dx / sqrt(Omega(I) - V(x)),
    with a square-root substitution at the turning point."""
    n = pot.require_isochronous()
    if action <= 0:
        raise DomainError("negative_semiperiod: action must be positive")
    energy = n * action
    r_neg = inverse_V_negative(pot, energy)

    def integrand(u):
        x = r_neg * (1.0 - u * u)
        val = energy - float(pot.v(x))
        return 2.0 * abs(r_neg) * u / math.sqrt(max(val, 1e-300))

    return math.sqrt(2.0) * _quad_checked(integrand, 0.0, 1.0)


# ---------------------------------------------------------------------------
# rotation argument (Sturm diagnostics)

def sturm_argument(vs: VariationalSolution, t_grid, component: str = "u"):
    """Continuous (unwrapped) argument of y + i*y' along t_grid, where y is
    the real (component="u") or imaginary (component="v") part of psi.

    Increments larger than pi/2 between grid nodes are resolved by step
    halving, so branch jumps cannot alias.
    """
    if component == "u":
        z_of = lambda t: complex(vs.u(t) + 1j * vs.du(t))
    elif component == "v":
        z_of = lambda t: complex(vs.v(t) + 1j * vs.dv(t))
    else:
        raise ValueError("component must be 'u' or 'v'")
    t = np.asarray(t_grid, dtype=float)

    def increment(t0, t1, z0, z1, depth):
        d = cmath.phase(z1 / z0)
        if abs(d) <= 0.5 * math.pi:
            return d
        if depth >= 48:
            raise NumericsError("sturm_argument: argument varies too fast")
        tm = 0.5 * (t0 + t1)
        zm = z_of(tm)
        return (increment(t0, tm, z0, zm, depth + 1)
                + increment(tm, t1, zm, z1, depth + 1))

    out = np.empty(t.shape)
    z_prev = z_of(t.flat[0])
    out.flat[0] = math.atan2(z_prev.imag, z_prev.real)
    for i in range(1, t.size):
        z_next = z_of(t.flat[i])
        out.flat[i] = out.flat[i - 1] + increment(t.flat[i - 1], t.flat[i],
                                                  z_prev, z_next, 0)
        z_prev = z_next
    return out


# ---------------------------------------------------------------------------
# bouncing-problem limit audit

@dataclass(frozen=True)
class BouncingAudit:
    action: float
    sup_x_defect: float
    sup_dxdI_defect: float
    dxdI_at_0: float


def bouncing_limit_audit(pot: PotentialSpec, I_list, cfg: IntegratorConfig,
                         delta: float = 0.1, n_grid: int = 2001):
    """Compare rescaled large-action orbits with the bouncing-problem limits
    2*sqrt(2)|cos(t/2)| (for x/sqrt(I), over the whole period) and
    sqrt(2)|cos(t/2)| (for sqrt(I)*dx/dI, away from a delta-neighbourhood of
    the contact time pi).  Returns one record per action."""
    if pot.require_isochronous() != 1:
        raise NumericsError("bouncing_limit_audit: needs minimal period 2*pi")
    records = []
    for action in I_list:
        action = float(action)
        r = amplitude_of_action(pot, action)
        sqrt_i = math.sqrt(action)
        traj = integrate_autonomous(pot, State(r, 0.0), 0.0, TWO_PI, cfg)
        t_full = np.linspace(0.0, TWO_PI, n_grid)
        x, _ = traj.eval(t_full)
        limit_x = 2.0 * math.sqrt(2.0) * np.abs(np.cos(0.5 * t_full))
        sup_x = float(np.max(np.abs(x / sqrt_i - limit_x)))

        t_in = np.linspace(0.0, math.pi - delta, n_grid // 2)
        dxdi = dx_dI_rofe_beketov(pot, r, t_in, cfg)
        limit_d = math.sqrt(2.0) * np.abs(np.cos(0.5 * t_in))
        sup_d = float(np.max(np.abs(sqrt_i * dxdi - limit_d)))
        records.append(BouncingAudit(action=action, sup_x_defect=sup_x,
                                     sup_dxdI_defect=sup_d,
                                     dxdI_at_0=float(sqrt_i * dxdi[0])))
    return records


# ---------------------------------------------------------------------------
# CSV emitters

def write_orbit_csv(orbit: AutonomousOrbit, path, n_samples: int = 1001):
    from .io import write_csv
    t = np.linspace(0.0, orbit.period, n_samples)
    x, v = orbit.trajectory.eval(t)
    return write_csv(path, ["t", "x", "v"], np.column_stack([t, x, v]))


def write_variational_csv(vs: VariationalSolution, path, n_samples: int = 1001):
    from .io import write_csv
    t = np.linspace(0.0, vs.t1, n_samples)
    p = vs._parts(t)
    return write_csv(path, ["t", "u", "du", "v", "dv"],
                     np.column_stack([t, p[2], p[3], p[4], p[5]]))


def write_bouncing_csv(records, path):
    from .io import write_csv
    rows = [(r.action, r.sup_x_defect, r.sup_dxdI_defect, r.dxdI_at_0)
            for r in records]
    return write_csv(path, ["I", "sup_x_defect", "sup_dxdI_defect", "dxdI_at_0"], rows)
