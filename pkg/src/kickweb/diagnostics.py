"""Linear stability, Lyapunov exponents, survival probability and symmetry scoring."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .webmap import ESCAPE_X, EscapeError, MapParams, PhaseState, step, step_arrays

PARABOLIC_TOL = 1e-9


class Jacobian(tuple):
    """Tangent map ``((j11, j12), (j21, j22))`` of one kick period."""

    __slots__ = ()

    def __new__(cls, j11, j12, j21, j22):
        return super().__new__(cls, (float(j11), float(j12), float(j21), float(j22)))

    j11 = property(lambda self: self[0])
    j12 = property(lambda self: self[1])
    j21 = property(lambda self: self[2])
    j22 = property(lambda self: self[3])

    @property
    def det(self) -> float:
        return self[0] * self[3] - self[1] * self[2]

    @property
    def trace(self) -> float:
        return self[0] + self[3]

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float).reshape(2, 2)


def jacobian(s: PhaseState, params: MapParams) -> Jacobian:
    x = s[0]
    if not abs(x) <= ESCAPE_X:
        raise EscapeError(f"cosh({x!r}) outside the representable region")
    a, b = params.a, params.b
    kc = params.K * math.cosh(x)
    return Jacobian(a + b * kc, b, -b + a * kc, a)


def jacobian_arrays(x: np.ndarray, params: MapParams) -> np.ndarray:
    """Jacobians at many positions; shape ``x.shape + (2, 2)``."""
    x = np.asarray(x, dtype=float)
    a, b = params.a, params.b
    kc = params.K * np.cosh(x)
    J = np.empty(x.shape + (2, 2))
    J[..., 0, 0] = a + b * kc
    J[..., 0, 1] = b
    J[..., 1, 0] = -b + a * kc
    J[..., 1, 1] = a
    return J


def classify_trace(tr: float, tol: float = PARABOLIC_TOL) -> str:
    d = abs(tr) - 2.0
    if abs(d) <= tol:
        return "parabolic"
    return "elliptic" if d < 0 else "hyperbolic"


@dataclass(frozen=True)
class EigenPair:
    lambda_plus: complex
    lambda_minus: complex
    trace: float
    classification: str


def eigenvalues(J: Jacobian, tol: float = PARABOLIC_TOL) -> EigenPair:
    """Eigenvalues of a unit-determinant 2x2 map from its trace alone."""
    tr = J.trace
    disc = tr * tr - 4.0
    if disc > 0:
        # larger-magnitude root directly, the other as its reciprocal (no cancellation)
        r = math.sqrt(disc)
        if tr >= 0:
            lp = complex(0.5 * (tr + r))
            lm = 1.0 / lp
        else:
            lm = complex(0.5 * (tr - r))
            lp = 1.0 / lm
    else:
        r = cmath.sqrt(disc)
        lp, lm = 0.5 * (tr + r), 0.5 * (tr - r)
    return EigenPair(lp, lm, tr, classify_trace(tr, tol))


def eigenvalue_sweep(params_list, xs) -> dict:
    """Trace and eigenvalues over positions ``xs`` for each parameter set.

    Returns a dict of flat arrays (one row per (params, x) pair).
    """
    xs = np.asarray(xs, dtype=float)
    rows = {k: [] for k in ("K", "theta", "q", "x", "trace", "lp_re", "lp_im", "lm_re", "lm_im")}
    for params in params_list:
        tr = 2.0 * params.a + params.K * params.b * np.cosh(xs)
        disc = tr * tr - 4.0
        real = disc > 0
        r = np.sqrt(np.abs(disc))
        lp = np.where(real, 0.0, 0.5 * tr) + 1j * np.where(real, 0.0, 0.5 * r)
        lm = np.conj(lp)
        big = 0.5 * (tr + np.sign(tr) * r)
        with np.errstate(divide="ignore"):
            small = 1.0 / big
        lp = np.where(real, np.where(tr >= 0, big, small), lp)
        lm = np.where(real, np.where(tr >= 0, small, big), lm)
        n = xs.size
        rows["K"].append(np.full(n, params.K))
        rows["theta"].append(np.full(n, params.theta))
        rows["q"].append(np.full(n, float(params.q) if params.q is not None else np.nan))
        rows["x"].append(xs)
        rows["trace"].append(tr)
        rows["lp_re"].append(lp.real)
        rows["lp_im"].append(lp.imag)
        rows["lm_re"].append(lm.real)
        rows["lm_im"].append(lm.imag)
    out = {k: np.concatenate(v) for k, v in rows.items()}
    prod = (out["lp_re"] + 1j * out["lp_im"]) * (out["lm_re"] + 1j * out["lm_im"])
    out["product_re"] = prod.real
    out["product_im"] = prod.imag
    out["classification"] = np.array([classify_trace(t) for t in out["trace"]])
    return out


# ---------------------------------------------------------------------------
# Lyapunov exponents


@dataclass
class LyapunovEstimate:
    value: float
    method: str  # "tangent" | "divergence"
    n_kicks: int
    kicks_used: int
    escaped: bool = False
    saturation_kick: int | None = None

    def as_dict(self) -> dict:
        return dict(value=self.value, method=self.method, n_kicks=self.n_kicks,
                    kicks_used=self.kicks_used, escaped=self.escaped,
                    saturation_kick=self.saturation_kick)


def lyapunov_tangent(initial: PhaseState, params: MapParams, n: int,
                     tangent=(1.0, 0.0)) -> LyapunovEstimate:
    """Largest Lyapunov exponent by tangent-vector propagation.

    The tangent vector is pushed through the Jacobian at each iterate and
    renormalised; the exponent is the mean log stretch per kick.  If the orbit
    escapes, the mean is taken over the completed prefix and ``escaped`` set.
    """
    if n < 100:
        raise ValueError("n must be >= 100")
    vx, vp = tangent
    nrm = math.hypot(vx, vp)
    vx, vp = vx / nrm, vp / nrm
    s = PhaseState(float(initial[0]), float(initial[1]))
    total = 0.0
    used = 0
    escaped = False
    for _ in range(n):
        try:
            J = jacobian(s, params)
            s = step(s, params)
        except EscapeError:
            escaped = True
            break
        wx = J[0] * vx + J[1] * vp
        wp = J[2] * vx + J[3] * vp
        r = math.hypot(wx, wp)
        if not (math.isfinite(r) and r > 0):
            escaped = True
            break
        total += math.log(r)
        vx, vp = wx / r, wp / r
        used += 1
    value = total / used if used else float("nan")
    return LyapunovEstimate(value, "tangent", n, used, escaped)


@dataclass
class DivergenceResult:
    estimate: LyapunovEstimate
    log_distance: np.ndarray  # ln ||delta(n)||, n = 0..len-1
    radius_scale: float
    fit_window: tuple[int, int]


def lyapunov_divergence(initial: PhaseState, offset, params: MapParams, n: int,
                        saturation_fraction: float = 0.1) -> DivergenceResult:
    """Exponent from the separation of two nearby orbits.

    Both orbits are iterated; the slope of ``ln ||delta(n)||`` is fitted by
    least squares over the kicks before the separation first exceeds
    ``saturation_fraction`` of the radius scale ``max(1, |initial|)``.
    """
    dx, dp = float(offset[0]), float(offset[1])
    d0 = math.hypot(dx, dp)
    if not (0 < d0 < 1):
        raise ValueError("offset norm must lie in (0, 1)")
    s = PhaseState(float(initial[0]), float(initial[1]))
    t = PhaseState(s.x + dx, s.p + dp)
    radius_scale = max(1.0, math.hypot(*s))
    limit = saturation_fraction * radius_scale

    logd = [math.log(math.hypot(t.x - s.x, t.p - s.p))]
    escaped = False
    saturation = None
    for i in range(1, n + 1):
        try:
            s, t = step(s, params), step(t, params)
        except EscapeError:
            escaped = True
            break
        d = math.hypot(t.x - s.x, t.p - s.p)
        if not math.isfinite(d):
            escaped = True
            break
        logd.append(math.log(d) if d > 0 else -math.inf)
        if saturation is None and d > limit:
            saturation = i
    logd = np.asarray(logd)
    end = saturation if saturation is not None else len(logd)
    window = (0, end)
    ks = np.arange(end)
    y = logd[:end]
    if end >= 2 and np.all(np.isfinite(y)):
        slope = float(np.polyfit(ks, y, 1)[0])
    else:
        slope = float("nan")
    est = LyapunovEstimate(slope, "divergence", n, len(logd) - 1, escaped, saturation)
    return DivergenceResult(est, logd, radius_scale, window)


# ---------------------------------------------------------------------------
# survival probability


@dataclass
class SurvivalCurve:
    r_c: float
    n_total: int
    p_s: np.ndarray
    params: MapParams | None = None
    metadata: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return dict(r_c=self.r_c, n_total=self.n_total, p_s=self.p_s.tolist(),
                    params=None if self.params is None else self.params.as_dict(),
                    metadata=self.metadata)


def disk_ensemble(center, radius: float, n: int, seed: int) -> np.ndarray:
    """``n`` points uniform in a disk, shape ``(n, 2)``."""
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.random(n))
    phi = 2.0 * np.pi * rng.random(n)
    return np.column_stack([center[0] + r * np.cos(phi), center[1] + r * np.sin(phi)])


def survival_probability(ensemble, params: MapParams, r_c: float, n_max: int) -> SurvivalCurve:
    """Fraction of the ensemble that has stayed inside ``x^2 + p^2 < r_c^2``.

    Members leave permanently at the first kick where ``x^2 + p^2 >= r_c^2``.
    ``p_s[n]`` for ``n = 0..n_max``.
    """
    pts = np.asarray(ensemble, dtype=float).reshape(-1, 2)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    r2 = r_c * r_c
    x, p = pts[:, 0].copy(), pts[:, 1].copy()
    if np.any(x * x + p * p >= r2):
        raise ValueError("all ensemble members must start inside r < r_c")
    n_total = len(x)
    alive = np.arange(n_total)
    exited = np.zeros(n_max + 1, dtype=np.int64)
    for n in range(1, n_max + 1):
        if alive.size:
            xs, ps = x[alive], p[alive]
            ok = np.abs(xs) <= ESCAPE_X
            with np.errstate(over="ignore", invalid="ignore"):
                nx, np_ = step_arrays(xs, ps, params)
            inside = ok & np.isfinite(nx) & np.isfinite(np_) & (nx * nx + np_ * np_ < r2)
            x[alive], p[alive] = nx, np_
            exited[n] = exited[n - 1] + int(alive.size - inside.sum())
            alive = alive[inside]
        else:
            exited[n] = exited[n - 1]
    p_s = 1.0 - exited / n_total
    return SurvivalCurve(r_c, n_total, p_s, params)


# ---------------------------------------------------------------------------
# q-fold symmetry


def symmetry_score(cloud, q: int, seed: int = 0) -> float:
    """Ratio of rotated-to-self nearest-neighbour distances of a point cloud.

    The de-duplicated cloud is split at random into halves ``A`` and ``B``.
    The score is ``mean NN(R A -> B) / mean NN(A -> B)`` with ``R`` the
    rotation by ``2 pi / q``.  Near 1 for a q-fold symmetric cloud.
    """
    q = int(q)
    if q < 3:
        raise ValueError("q must be an integer >= 3")
    pts = np.asarray(cloud, dtype=float).reshape(-1, 2)
    if not np.isfinite(pts).all():
        raise ValueError("cloud contains non-finite points")
    if len(pts) < 1000:
        raise ValueError("cloud must contain at least 1000 points")
    pts = np.unique(pts, axis=0)
    if len(pts) < 2:
        raise ValueError("degenerate cloud: all points identical")
    rng = np.random.default_rng(seed)
    idx = rng.permutation(len(pts))
    half = len(pts) // 2
    A, B = pts[idx[:half]], pts[idx[half:]]
    c, s = math.cos(2 * math.pi / q), math.sin(2 * math.pi / q)
    RA = np.column_stack([c * A[:, 0] - s * A[:, 1], s * A[:, 0] + c * A[:, 1]])
    tree = cKDTree(B)
    d_self = tree.query(A)[0].mean()
    d_rot = tree.query(RA)[0].mean()
    return float(d_rot / d_self)
