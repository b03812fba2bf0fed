"""
Lyapunov exponents
==================

Tangent-vector propagation and two-orbit divergence, first on an exactly
hyperbolic fixed point where the answer is known, then at (15, 0) for q = 5, K = 0.5.
"""
# %%
import math

from kickweb import MapParams, PhaseState, lyapunov_divergence, lyapunov_tangent

params = MapParams.from_q(1.0, 8)  # origin is hyperbolic here
tr = 2 * params.a + params.K * params.b
print("log lambda+ =", math.log((tr + math.sqrt(tr * tr - 4)) / 2))
print("tangent     =", lyapunov_tangent(PhaseState(0, 0), params, 10_000).value)
div = lyapunov_divergence(PhaseState(0, 0), (1e-5, 0), params, 1000)
print("divergence  =", div.estimate.value, "fit window", div.fit_window)

# %%
params = MapParams.from_q(0.5, 5)
est = lyapunov_tangent(PhaseState(15, 0), params, 10_000)
print("(15, 0), q=5, K=0.5:", est)

# %%
print("K = 0:", lyapunov_tangent(PhaseState(3, 1), MapParams.from_q(0, 5), 10_000).value)
