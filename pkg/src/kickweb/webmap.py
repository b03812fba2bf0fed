"""Dimensionless stochastic web map of the kicked membrane.

One kick period is a momentum kick ``p -> p + K sinh(x)`` followed by a
free harmonic rotation of the phase plane by ``theta``::

    x' = a x + (p + K sinh x) b
    p' = (p + K sinh x) a - b x,      a = cos(theta), b = sin(theta)

Scalar functions (``kick``, ``rotate``, ``step``) operate on plain floats via
:mod:`math` so that single orbits replay bit-for-bit.  ``step_arrays`` is the
vectorised counterpart used for ensembles.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

#: |x| beyond which a kick is treated as escape (sinh overflows near 710).
ESCAPE_X = 700.0

#: |sin theta| below which the rotation is treated as degenerate.
DEGENERATE_SIN = 1e-12


class EscapeError(ArithmeticError):
    """Raised when a state has left the numerically representable region."""


class PhaseState(NamedTuple):
    """Point ``(x, p)`` in dimensionless phase space."""

    x: float
    p: float

    def to_complex(self) -> complex:
        return complex(self.x, self.p)

    @classmethod
    def from_complex(cls, z: complex) -> "PhaseState":
        return cls(z.real, z.imag)


def _parse_q(q) -> Fraction:
    if isinstance(q, Fraction):
        return q
    if isinstance(q, str):
        return Fraction(q.strip())
    if isinstance(q, float):
        # keep non-integral floats as an exact binary fraction
        return Fraction(q)
    return Fraction(int(q))


@dataclass(frozen=True)
class MapParams:
    """Kick strength ``K`` and rotation angle ``theta`` (radians).

    Build with :meth:`from_q` for the resonant case ``theta = 2 pi / q``; the
    angle is then derived from ``q`` and never stored independently.
    """

    K: float
    theta: float
    q: Fraction | None = None
    a: float = field(init=False, repr=False, compare=False)
    b: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.K) and self.K >= 0):
            raise ValueError(f"K must be finite and >= 0, got {self.K!r}")
        if self.q is not None:
            q = _parse_q(self.q)
            if q <= 1:
                raise ValueError(f"q must exceed 1 so that theta lies in (0, 2pi), got {q}")
            object.__setattr__(self, "q", q)
            object.__setattr__(self, "theta", TWO_PI / float(q))
        if not (0.0 < self.theta < TWO_PI):
            raise ValueError(f"theta must lie in (0, 2pi), got {self.theta!r}")
        object.__setattr__(self, "a", math.cos(self.theta))
        object.__setattr__(self, "b", math.sin(self.theta))

    @classmethod
    def from_q(cls, K: float, q) -> "MapParams":
        return cls(K=float(K), theta=0.0, q=_parse_q(q))

    @classmethod
    def from_theta(cls, K: float, theta: float) -> "MapParams":
        return cls(K=float(K), theta=float(theta))

    def as_dict(self) -> dict:
        return {
            "K": self.K,
            "theta": self.theta,
            "q": None if self.q is None else str(self.q),
        }


# ---------------------------------------------------------------------------
# scalar stepping


def kick(s: PhaseState, K: float) -> PhaseState:
    """Apply one delta kick: ``p -> p + K sinh(x)``; ``x`` is unchanged."""
    x, p = s
    if not abs(x) <= ESCAPE_X:
        raise EscapeError(f"|x| = {abs(x)!r} beyond escape threshold {ESCAPE_X}")
    return PhaseState(x, p + K * math.sinh(x))


def _rotate_ab(x: float, p: float, a: float, b: float) -> PhaseState:
    return PhaseState(a * x + b * p, a * p - b * x)


def rotate(s: PhaseState, theta: float) -> PhaseState:
    """Free harmonic evolution over phase ``theta`` (clockwise in the x-p plane)."""
    return _rotate_ab(s[0], s[1], math.cos(theta), math.sin(theta))


def step(s: PhaseState, params: MapParams) -> PhaseState:
    """One kick-to-kick iteration: kick, then rotate.

    Raises
    ------
    EscapeError
        If ``|x|`` exceeds :data:`ESCAPE_X`.
    """
    x, P = kick(s, params.K)
    return _rotate_ab(x, P, params.a, params.b)


def step_complex(z: complex, params: MapParams) -> complex:
    """Complex form ``z' = (z + i K sinh(Re z)) exp(-i theta)`` with ``z = x + i p``.

    The signs are chosen to reproduce :func:`step` exactly.  A rotation of the
    ``(x, p)`` plane by ``+theta`` in :func:`rotate` is multiplication by
    ``exp(-i theta)``, and the kick adds ``+K sinh x`` to the momentum.
    """
    x = z.real
    if not abs(x) <= ESCAPE_X:
        raise EscapeError(f"|x| = {abs(x)!r} beyond escape threshold {ESCAPE_X}")
    return (z + 1j * (params.K * math.sinh(x))) * complex(params.a, -params.b)


def step_arrays(x: np.ndarray, p: np.ndarray, params: MapParams) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`step` for arrays of states.

    No escape check is made here; callers mask out entries with
    ``|x| > ESCAPE_X`` before stepping.
    """
    P = p + params.K * np.sinh(x)
    return params.a * x + params.b * P, params.a * P - params.b * x


# ---------------------------------------------------------------------------
# orbits


@dataclass
class OrbitRecord:
    """Stroboscopic samples of one orbit.

    ``states[0]`` is the initial condition; thereafter every
    ``record_every``-th iterate.  When the orbit escapes, ``escaped`` is set,
    ``escape_kick`` is the kick at which stepping failed and ``last_state``
    is the last finite state reached.
    """

    params: MapParams
    initial: PhaseState
    states: list[PhaseState]
    n_kicks: int
    record_every: int = 1
    escaped: bool = False
    escape_kick: int | None = None
    last_state: PhaseState | None = None

    @property
    def kicks_completed(self) -> int:
        return self.n_kicks if not self.escaped else self.escape_kick - 1

    def as_array(self) -> np.ndarray:
        return np.asarray(self.states, dtype=float).reshape(-1, 2)


def iterate(initial: PhaseState, params: MapParams, n: int, record_every: int = 1) -> OrbitRecord:
    if n < 0:
        raise ValueError("n must be >= 0")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    s = PhaseState(float(initial[0]), float(initial[1]))
    states = [s]
    for i in range(1, n + 1):
        try:
            s_next = step(s, params)
        except EscapeError:
            return OrbitRecord(params, states[0], states, n, record_every,
                               escaped=True, escape_kick=i, last_state=s)
        s = s_next
        if i % record_every == 0:
            states.append(s)
    return OrbitRecord(params, states[0], states, n, record_every, last_state=s)


# ---------------------------------------------------------------------------
# fixed points


@dataclass(frozen=True)
class FixedPoint:
    state: PhaseState
    residual: float
    stability: str  # "elliptic" | "hyperbolic" | "parabolic"
    trace: float


def fixed_line_slope(params: MapParams) -> float:
    """Nominal slope ``(1 - a) / b`` of the fixed-point line.

    Solving ``step(s) == s`` directly gives ``p = (a - 1)/b * x``, the same
    line with opposite sign; :func:`find_fixed_points` returns the verified
    points, which lie on ``p = -fixed_line_slope(params) * x``.
    """
    if abs(params.b) < DEGENERATE_SIN:
        raise ValueError(f"degenerate rotation: sin(theta) = {params.b!r}")
    return (1.0 - params.a) / params.b


def _fixed_condition(x, K: float, c: float):
    # step(s) == s  <=>  p = -(c/2) x  and  K sinh x = c x,  c = 2(1 - a)/b
    return K * np.sinh(x) - c * x


def _bisect(f, lo: float, hi: float, xtol: float) -> float:
    flo = f(lo)
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid < 0) == (flo < 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_fixed_points(params: MapParams, search_radius: float = 10.0, tolerance: float = 1e-10,
                      n_grid: int = 10_000, xtol: float = 1e-14) -> list[FixedPoint]:
    """All fixed points of :func:`step` with ``|x| <= search_radius``.

    Eliminating ``p`` from the two fixed-point equations leaves the scalar
    condition ``K sinh x = 2 tan(theta/2) x``.  Sign changes are bracketed on
    a uniform grid and bisected; every candidate is confirmed by direct
    stepping and classified from the trace of the Jacobian.
    """
    from .diagnostics import eigenvalues, jacobian

    if search_radius <= 0:
        raise ValueError("search_radius must be > 0")
    if abs(params.b) < DEGENERATE_SIN:
        raise ValueError(f"degenerate rotation: sin(theta) = {params.b!r}")
    K = params.K
    c = 2.0 * (1.0 - params.a) / params.b
    slope = -0.5 * c

    roots = [0.0]
    R = min(search_radius, ESCAPE_X)
    grid = np.linspace(-R, R, n_grid)
    g = _fixed_condition(grid, K, c)
    sign = np.sign(g)
    brackets = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    f = lambda x: K * math.sinh(x) - c * x  # noqa: E731
    for i in brackets:
        lo, hi = float(grid[i]), float(grid[i + 1])
        if lo <= 0.0 <= hi:
            continue  # origin, already listed
        roots.append(_bisect(f, lo, hi, xtol))
    roots += [float(x) for x in grid[g == 0.0] if x != 0.0]

    points = []
    for x in sorted(set(roots)):
        s = PhaseState(x, slope * x) if x != 0.0 else PhaseState(0.0, 0.0)
        s1 = step(s, params)
        residual = math.hypot(s1.x - s.x, s1.p - s.p)
        if residual >= tolerance:
            log.warning("dropping fixed-point candidate x=%r: residual %.3g", x, residual)
            continue
        ep = eigenvalues(jacobian(s, params))
        points.append(FixedPoint(s, residual, ep.classification, ep.trace))
    return points
