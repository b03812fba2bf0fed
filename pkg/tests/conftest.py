import math

import numpy as np
import pytest

from kickweb import MapParams


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def rk4_oscillator(x, p, t_end, n_steps):
    """Classical RK4 for x' = p, p' = -x; independent of the analytic rotation."""
    h = t_end / n_steps

    def f(x, p):
        return p, -x

    for _ in range(n_steps):
        k1x, k1p = f(x, p)
        k2x, k2p = f(x + 0.5 * h * k1x, p + 0.5 * h * k1p)
        k3x, k3p = f(x + 0.5 * h * k2x, p + 0.5 * h * k2p)
        k4x, k4p = f(x + h * k3x, p + h * k3p)
        x += h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        p += h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
    return x, p


def image_area(tri, params, per_edge=200):
    """Area of the image of a triangle under one step, via its refined boundary.

    The edges are subdivided, every boundary point is stepped, and the shoelace
    sum is taken about the first image vertex with compensated summation.
    """
    from kickweb import step_arrays

    t = np.linspace(0.0, 1.0, per_edge, endpoint=False)
    xs, ps = [], []
    for i in range(3):
        (x0, p0), (x1, p1) = tri[i], tri[(i + 1) % 3]
        # interpolate as offsets so that the edges are exact in their direction
        xs.append(x0 + t * (x1 - x0))
        ps.append(p0 + t * (p1 - p0))
    X, P = step_arrays(np.concatenate(xs), np.concatenate(ps), params)
    X = X - X[0]
    P = P - P[0]
    Xn, Pn = np.roll(X, -1), np.roll(P, -1)
    return 0.5 * math.fsum((X * Pn - Xn * P).tolist())


def triangle_area(tri):
    (x0, p0), (x1, p1), (x2, p2) = tri
    return 0.5 * ((x1 - x0) * (p2 - p0) - (x2 - x0) * (p1 - p0))


Q_RANGE = [3, 4, 5, 6, 7, 8]


def params_q(K, q):
    return MapParams.from_q(K, q)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
