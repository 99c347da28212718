"""Potential families for isochronous centers: harmonic, shifted Pinney,
asymmetric (piecewise-quadratic), and user-supplied callbacks, together with
the singular-endpoint sigma map and its structural audit."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError, DomainError, NumericsError

DOMAIN_GUARD = 1e-14


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """A potential V with its derivatives and structural metadata.

    ``n_iso`` is the isochrony integer N (minimal period 2*pi/N) when known;
    None means the potential has not been certified isochronous and callers
    must audit the period themselves.  Evaluator callbacks must be pure and
    accept numpy arrays.
    """

    kind: str
    params: tuple
    domain_left: float
    n_iso: int | None
    _v: callable
    _dv: callable
    _d2v: callable
    kink_at_zero: bool = False

    domain_right = math.inf

    @property
    def singular_left(self):
        return math.isfinite(self.domain_left)

    def _check_domain(self, x):
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise DomainError(f"{self.kind}: non-finite evaluation point")
        if self.singular_left and np.any(x <= self.domain_left + DOMAIN_GUARD):
            raise DomainError(
                f"{self.kind}: x <= {self.domain_left} + {DOMAIN_GUARD} is outside the domain")
        return x

    def v(self, x):
        out = self._v(self._check_domain(x))
        return out if np.ndim(out) else float(out)

    def dv(self, x):
        out = self._dv(self._check_domain(x))
        return out if np.ndim(out) else float(out)

    def d2v(self, x):
        out = self._d2v(self._check_domain(x))
        return out if np.ndim(out) else float(out)

    def require_isochronous(self):
        if self.n_iso is None:
            raise ConfigError(
                f"{self.kind}: operation requires a certified isochrony integer; "
                "audit the period first (minimal_period) and construct with n_iso")
        return self.n_iso


def eval_V(pot: PotentialSpec, x):
    return pot.v(x)


def eval_dV(pot: PotentialSpec, x):
    return pot.dv(x)


def eval_d2V(pot: PotentialSpec, x):
    return pot.d2v(x)


@functools.lru_cache(maxsize=64)
def harmonic(n: int) -> PotentialSpec:
    """V(x) = n^2 x^2 / 2; every orbit has minimal period 2*pi/n."""
    if n < 1 or n != int(n):
        raise ConfigError("potential.n: must be a positive integer")
    n = int(n)
    n2 = float(n * n)
    return PotentialSpec(
        kind="harmonic", params=(n,), domain_left=-math.inf, n_iso=n,
        _v=lambda x: 0.5 * n2 * x * x,
        _dv=lambda x: n2 * x,
        _d2v=lambda x: np.full_like(np.asarray(x, dtype=float), n2))


@functools.lru_cache(maxsize=1)
def pinney() -> PotentialSpec:
    """Shifted Pinney potential on (-1, inf):
    V(x) = ((x+1)^2 + (x+1)^-2)/8 - 1/4, with a vertical asymptote at x=-1.
    All orbits are 2*pi-periodic."""
    def _v(x):
        u = np.asarray(x, dtype=float) + 1.0
        return 0.125 * (u * u + u ** -2) - 0.25

    def _dv(x):
        u = np.asarray(x, dtype=float) + 1.0
        return 0.25 * (u - u ** -3)

    def _d2v(x):
        u = np.asarray(x, dtype=float) + 1.0
        return 0.25 + 0.75 * u ** -4

    return PotentialSpec(kind="pinney", params=(), domain_left=-1.0, n_iso=1,
                         _v=_v, _dv=_dv, _d2v=_d2v)


@functools.lru_cache(maxsize=64)
def asymmetric(alpha: float, beta: float) -> PotentialSpec:
    """V(x) = (alpha (x^+)^2 + beta (x^-)^2)/2.

    V'' jumps at x=0; by convention d2v(0) = alpha.  The minimal period is
    pi/sqrt(alpha) + pi/sqrt(beta); when that equals 2*pi/N for an integer N
    the potential is registered as isochronous, otherwise n_iso is None and
    only the measured period is meaningful.
    """
    if alpha <= 0 or beta <= 0:
        raise ConfigError("potential.alpha/beta: must be positive")
    alpha, beta = float(alpha), float(beta)

    def _v(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * (alpha * np.maximum(x, 0.0) ** 2 + beta * np.minimum(x, 0.0) ** 2)

    def _dv(x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, alpha * x, beta * x)

    def _d2v(x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, alpha, beta)

    nu = 2.0 / (1.0 / math.sqrt(alpha) + 1.0 / math.sqrt(beta))
    n_iso = int(round(nu)) if abs(nu - round(nu)) < 1e-9 and round(nu) >= 1 else None
    return PotentialSpec(kind="asymmetric", params=(alpha, beta),
                         domain_left=-math.inf, n_iso=n_iso,
                         _v=_v, _dv=_dv, _d2v=_d2v, kink_at_zero=True)


def custom(v, dv, d2v, domain_left=-math.inf, n_iso=None, kink_at_zero=False,
           kind="custom") -> PotentialSpec:
    """Wrap user-supplied evaluators.  Isochrony is not assumed: pass n_iso
    only after auditing the period."""
    return PotentialSpec(kind=kind, params=(), domain_left=float(domain_left),
                         n_iso=n_iso, _v=v, _dv=dv, _d2v=d2v,
                         kink_at_zero=kink_at_zero)


def inverse_V_negative(pot: PotentialSpec, level: float) -> float:
    """The unique s in (a, 0) with V(s) = level (level > 0)."""
    if level <= 0:
        raise NumericsError("inverse_V_negative: level must be positive")
    a = pot.domain_left

    def g(s):
        return pot.v(s) - level

    hi = lo = None
    if math.isfinite(a):
        for k in range(1, 200):
            cand = a * 2.0 ** (-k)
            if g(cand) < 0:
                hi = cand
                break
        if hi is not None:
            for k in range(0, 200):
                cand = a + (hi - a) * 2.0 ** (-k)
                if cand <= a + DOMAIN_GUARD * 4:
                    break
                if g(cand) > 0:
                    lo = cand
                    break
    else:
        for k in range(-200, 400):
            cand = -(2.0 ** (-k / 2.0))
            if g(cand) < 0:
                hi = cand
                break
        if hi is not None:
            for k in range(0, 2000):
                cand = hi * 2.0 ** k
                if g(cand) > 0:
                    lo = cand
                    break
    if hi is None or lo is None:
        raise NumericsError(
            f"inverse_V_negative: could not bracket V = {level} on ({a}, 0)")
    root = brentq(g, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)
    return float(root)


def inverse_V_positive(pot: PotentialSpec, level: float) -> float:
    """The unique r in (0, inf) with V(r) = level (level > 0)."""
    if level <= 0:
        raise NumericsError("inverse_V_positive: level must be positive")

    def g(s):
        return pot.v(s) - level

    hi = lo = None
    for k in range(-200, 400):
        cand = 2.0 ** (k / 2.0)
        if g(cand) > 0:
            hi = cand
            break
    if hi is not None:
        for k in range(0, 2000):
            cand = hi * 2.0 ** (-k)
            if cand <= 0:
                break
            if g(cand) < 0:
                lo = cand
                break
    if hi is None or lo is None:
        raise NumericsError(
            f"inverse_V_positive: could not bracket V = {level} on (0, inf)")
    root = brentq(g, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)
    return float(root)


def sigma_map(pot: PotentialSpec, x: float) -> float:
    """The negative preimage sigma(x) in (a, 0) with V(sigma(x)) = V(x).

    Requires a potential with a finite singular left endpoint and x > 0.
    Bracketed root finding, relative tolerance well below 1e-12.
    """
    if not pot.singular_left:
        raise DomainError(f"{pot.kind}: sigma map needs a finite left endpoint")
    if x <= 0:
        raise DomainError("sigma_map: x must be positive")
    return inverse_V_negative(pot, pot.v(x))


@dataclass(frozen=True)
class AppendixAudit:
    """Per-point diagnostics of the singular-isochronous structure:
    iso_residuals[i] = V(x_i) - (x_i - sigma(x_i))^2 / 8 and
    slope_defects[i] = V'(x_i) - x_i/4, to be compared with slope_limit."""

    x: np.ndarray
    iso_residuals: np.ndarray
    slope_defects: np.ndarray
    slope_limit: float


def appendix_audit(pot: PotentialSpec, x_grid) -> AppendixAudit:
    """Audit the identity V(x) = (x - sigma(x))^2/8 and the slope defect
    V'(x) - x/4 on a grid of positive points (2*pi-isochronous potentials
    with one asymptote)."""
    if pot.require_isochronous() != 1:
        raise ConfigError(f"{pot.kind}: appendix audit needs minimal period 2*pi")
    if not pot.singular_left:
        raise DomainError(f"{pot.kind}: appendix audit needs a finite left endpoint")
    x = np.asarray(x_grid, dtype=float)
    sig = np.array([sigma_map(pot, xi) for xi in x])
    iso = pot.v(x) - (x - sig) ** 2 / 8.0
    slope = pot.dv(x) - x / 4.0
    return AppendixAudit(x=x, iso_residuals=np.asarray(iso),
                         slope_defects=np.asarray(slope),
                         slope_limit=-pot.domain_left / 4.0)


def potential_from_descriptor(d) -> PotentialSpec:
    """Build a PotentialSpec from its JSON descriptor (dict)."""
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError("potential: descriptor must be an object with a 'kind' field")
    kind = d["kind"]
    try:
        if kind == "harmonic":
            return harmonic(int(d["n"]))
        if kind == "pinney":
            return pinney()
        if kind == "asymmetric":
            return asymmetric(float(d["alpha"]), float(d["beta"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"potential: malformed descriptor ({exc})") from exc
    raise ConfigError(f"potential.kind: unknown kind {kind!r}")


def potential_to_descriptor(pot: PotentialSpec):
    if pot.kind == "harmonic":
        return {"kind": "harmonic", "n": pot.params[0]}
    if pot.kind == "pinney":
        return {"kind": "pinney"}
    if pot.kind == "asymmetric":
        return {"kind": "asymmetric", "alpha": pot.params[0], "beta": pot.params[1]}
    raise ConfigError(f"potential.kind: {pot.kind!r} has no JSON descriptor")
