"""2*pi-periodic forcing terms: trigonometric polynomials, piecewise-constant
profiles and sampled signals, plus their L1 norms and Fourier data."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import ConfigError

TWO_PI = 2.0 * math.pi


class ForcingTerm:
    """Base class for 2*pi-periodic locally integrable forcings.

    Instances are immutable and all evaluations are pure, so they can be
    shared freely between threads.
    """

    def eval(self, t):
        raise NotImplementedError

    def jump_points(self):
        """Discontinuity times of p within [0, 2*pi), as a sorted array."""
        return np.empty(0)

    def kink_points(self):
        """Times in [0, 2*pi) where p is continuous but not smooth."""
        return np.empty(0)

    def split_points(self):
        """All smoothness breakpoints (jumps plus kinks) in [0, 2*pi)."""
        pts = np.concatenate([self.jump_points(), self.kink_points()])
        return np.unique(pts)

    def to_descriptor(self):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class TrigPoly(ForcingTerm):
    """a0 + sum_k (a_k cos(kt) + b_k sin(kt)) with finitely many harmonics."""

    a0: float = 0.0
    cos_coeffs: tuple = ()
    sin_coeffs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "cos_coeffs", tuple(float(c) for c in self.cos_coeffs))
        object.__setattr__(self, "sin_coeffs", tuple(float(c) for c in self.sin_coeffs))
        for name in ("a0", "cos_coeffs", "sin_coeffs"):
            vals = getattr(self, name)
            vals = vals if isinstance(vals, tuple) else (vals,)
            if not all(math.isfinite(v) for v in vals):
                raise ConfigError(f"forcing.{name}: coefficients must be finite")

    @property
    def degree(self):
        return max(len(self.cos_coeffs), len(self.sin_coeffs))

    def harmonic(self, k):
        """(a_k, b_k) with zero padding beyond the stored degree; k >= 1."""
        a = self.cos_coeffs[k - 1] if k <= len(self.cos_coeffs) else 0.0
        b = self.sin_coeffs[k - 1] if k <= len(self.sin_coeffs) else 0.0
        return a, b

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, self.a0, dtype=float)
        for k in range(1, self.degree + 1):
            a, b = self.harmonic(k)
            if a:
                out = out + a * np.cos(k * t)
            if b:
                out = out + b * np.sin(k * t)
        return out if out.ndim else float(out)

    def to_descriptor(self):
        return {"kind": "trig", "a0": self.a0, "a": list(self.cos_coeffs),
                "b": list(self.sin_coeffs)}


@dataclass(frozen=True, eq=False)
class PiecewiseConst(ForcingTerm):
    """Right-continuous step function of period ``period`` (a divisor of 2*pi).

    ``breakpoints`` are the piece starts within [0, period); the value at a
    breakpoint belongs to the piece on its right.  Times below the first
    breakpoint wrap around to the last piece.
    """

    breakpoints: tuple
    values: tuple
    period: float = TWO_PI

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.period <= 0 or not math.isfinite(self.period):
            raise ConfigError("forcing.period: must be a positive real")
        m = TWO_PI / self.period
        if abs(m - round(m)) > 1e-9 or round(m) < 1:
            raise ConfigError("forcing.period: 2*pi/period must be a positive integer")
        if len(self.breakpoints) != len(self.values) or not self.breakpoints:
            raise ConfigError("forcing.breaks: need one value per breakpoint")
        b = np.asarray(self.breakpoints)
        if np.any(np.diff(b) <= 0) or b[0] < 0 or b[-1] >= self.period:
            raise ConfigError("forcing.breaks: must be strictly increasing within [0, period)")
        if not all(math.isfinite(v) for v in self.values):
            raise ConfigError("forcing.values: must be finite")

    @property
    def repetitions(self):
        return int(round(TWO_PI / self.period))

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        tau = np.mod(t, self.period)
        idx = np.searchsorted(self.breakpoints, tau, side="right") - 1
        vals = np.asarray(self.values)[idx % len(self.values)]
        return vals if vals.ndim else float(vals)

    def jump_points(self):
        base = np.asarray(self.breakpoints)
        pts = np.concatenate([base + k * self.period for k in range(self.repetitions)])
        return np.unique(np.mod(pts, TWO_PI))

    def to_descriptor(self):
        return {"kind": "piecewise", "period": self.period,
                "breaks": list(self.breakpoints), "values": list(self.values)}


@dataclass(frozen=True, eq=False)
class Sampled(ForcingTerm):
    """Values on the uniform grid 2*pi*j/n, j=0..n-1, linearly interpolated
    and wrapped periodically."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) < 2:
            raise ConfigError("forcing.values: sampled forcing needs >= 2 samples")
        if not all(math.isfinite(v) for v in self.values):
            raise ConfigError("forcing.values: must be finite")

    @property
    def times(self):
        return np.linspace(0.0, TWO_PI, len(self.values), endpoint=False)

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        tau = np.mod(t, TWO_PI)
        tgrid = np.append(self.times, TWO_PI)
        vgrid = np.append(self.values, self.values[0])
        out = np.interp(tau, tgrid, vgrid)
        return out if out.ndim else float(out)

    def kink_points(self):
        return self.times.copy()

    def to_descriptor(self):
        return {"kind": "sampled", "values": list(self.values)}


def eval_forcing(f: ForcingTerm, t):
    """Value of the forcing at time t (scalar or array), 2*pi-periodically."""
    return f.eval(t)


def _segments(f, a, b):
    """Partition [a, b] at every smoothness breakpoint of f."""
    pts = f.split_points()
    if pts.size == 0:
        return [(a, b)]
    k0 = math.floor(a / TWO_PI) - 1
    k1 = math.ceil(b / TWO_PI) + 1
    all_pts = np.concatenate([pts + k * TWO_PI for k in range(k0, k1 + 1)])
    inner = np.sort(all_pts[(all_pts > a + 1e-13) & (all_pts < b - 1e-13)])
    knots = np.concatenate([[a], inner, [b]])
    return list(zip(knots[:-1], knots[1:]))


def _quad_segments(g, f, a, b):
    total = 0.0
    for lo, hi in _segments(f, a, b):
        val, _ = quad(g, lo, hi, epsabs=1e-12, epsrel=1e-11, limit=400)
        total += val
    return total


@functools.lru_cache(maxsize=256)
def l1_norm(f: ForcingTerm) -> float:
    """Integral of |p| over one period, by adaptive quadrature split at the
    breakpoints of p (relative tolerance well below 1e-10)."""
    return _quad_segments(lambda t: abs(float(f.eval(t))), f, 0.0, TWO_PI)


def abs_integral(f: ForcingTerm, t: float) -> float:
    """Integral of |p| over [0, t] for t >= 0 (whole periods reuse l1_norm)."""
    if t < 0:
        raise ValueError("abs_integral: t must be nonnegative")
    k = math.floor(t / TWO_PI)
    rem = t - k * TWO_PI
    total = k * l1_norm(f)
    if rem > 0:
        total += _quad_segments(lambda s: abs(float(f.eval(s))), f, 0.0, rem)
    return total


def fourier_coefficient(f: ForcingTerm, n: int) -> complex:
    """I_n(p) = integral of p(t) e^{int} over [0, 2*pi], n >= 1.

    Exact for trigonometric polynomials and step functions; adaptive
    quadrature otherwise.
    """
    if n < 1:
        raise ValueError("fourier_coefficient: n must be >= 1")
    if isinstance(f, TrigPoly):
        # orthogonality: only the matching harmonic survives
        a, b = f.harmonic(n)
        return complex(math.pi * a, math.pi * b)
    if isinstance(f, PiecewiseConst):
        total = 0.0 + 0.0j
        for (lo, hi) in _segments(f, 0.0, TWO_PI):
            c = float(f.eval(0.5 * (lo + hi)))
            total += c * (np.exp(1j * n * hi) - np.exp(1j * n * lo)) / (1j * n)
        return complex(total)
    re = _quad_segments(lambda t: float(f.eval(t)) * math.cos(n * t), f, 0.0, TWO_PI)
    im = _quad_segments(lambda t: float(f.eval(t)) * math.sin(n * t), f, 0.0, TWO_PI)
    return complex(re, im)


def fourier_coefficient_quadrature(f: ForcingTerm, n: int) -> complex:
    """I_n(p) by pure quadrature regardless of the forcing kind (used to
    cross-check the closed forms)."""
    if n < 1:
        raise ValueError("fourier_coefficient: n must be >= 1")
    re = _quad_segments(lambda t: float(f.eval(t)) * math.cos(n * t), f, 0.0, TWO_PI)
    im = _quad_segments(lambda t: float(f.eval(t)) * math.sin(n * t), f, 0.0, TWO_PI)
    return complex(re, im)


def complex_fourier_coefficients(f: ForcingTerm, kmax: int):
    """Coefficients p_hat_k, k = -kmax..kmax, of p(t) = sum p_hat_k e^{ikt}."""
    out = np.zeros(2 * kmax + 1, dtype=complex)
    if isinstance(f, TrigPoly):
        out[kmax] = f.a0
        for k in range(1, kmax + 1):
            a, b = f.harmonic(k)
            out[kmax + k] = 0.5 * (a - 1j * b)
            out[kmax - k] = 0.5 * (a + 1j * b)
        return out
    mean = _quad_segments(lambda t: float(f.eval(t)), f, 0.0, TWO_PI) / TWO_PI
    out[kmax] = mean
    for k in range(1, kmax + 1):
        ik = fourier_coefficient(f, k)
        # I_k = int p e^{ikt} = 2*pi * conj-side coefficient
        out[kmax - k] = ik / TWO_PI
        out[kmax + k] = np.conj(ik) / TWO_PI
    return out


def forcing_from_descriptor(d) -> ForcingTerm:
    """Build a ForcingTerm from its JSON descriptor (dict)."""
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError("forcing: descriptor must be an object with a 'kind' field")
    kind = d["kind"]
    try:
        if kind == "trig":
            return TrigPoly(a0=float(d.get("a0", 0.0)),
                            cos_coeffs=tuple(d.get("a", ())),
                            sin_coeffs=tuple(d.get("b", ())))
        if kind == "piecewise":
            return PiecewiseConst(breakpoints=tuple(d["breaks"]),
                                  values=tuple(d["values"]),
                                  period=float(d.get("period", TWO_PI)))
        if kind == "sampled":
            return Sampled(values=tuple(d["values"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"forcing: malformed descriptor ({exc})") from exc
    raise ConfigError(f"forcing.kind: unknown kind {kind!r}")
