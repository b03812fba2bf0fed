"""
Fixed points, Jacobian and eigenvalues
======================================
"""
# %%
import numpy as np

from kickweb import MapParams, PhaseState, eigenvalues, find_fixed_points, fixed_line_slope, jacobian
from kickweb.diagnostics import eigenvalue_sweep

params = MapParams.from_q(0.01, 4)
for fp in find_fixed_points(params, search_radius=10):
    print(f"({fp.state.x:+.6f}, {fp.state.p:+.6f})  residual {fp.residual:.1e}  {fp.stability}")

# The points sit on p = -(1 - a)/b x; fixed_line_slope gives the nominal (1 - a)/b.
print("(1 - a)/b =", fixed_line_slope(params))

# %%
J = jacobian(PhaseState(2.0, 0.0), MapParams.from_q(0.5, 5))
ep = eigenvalues(J)
print("det", J.det, "trace", J.trace, "->", ep)

# %%
# Eigenvalue sweep over x for q = 3..8 at K = 0.5.
xs = np.linspace(-10, 10, 2001)
sw = eigenvalue_sweep([MapParams.from_q(0.5, q) for q in range(3, 9)], xs)
prod = (sw["lp_re"] + 1j * sw["lp_im"]) * (sw["lm_re"] + 1j * sw["lm_im"])
print("max |l+ l- - 1| =", np.abs(prod - 1).max())
for q in range(3, 9):
    m = sw["q"] == q
    ell = sw["classification"][m] == "elliptic"
    print(f"q={q}: elliptic for |x| < {np.abs(sw['x'][m][ell]).max():.2f}")
