"""
Phase portraits and q-fold structure
====================================

Iterate a lattice of initial conditions for 15,000 kicks at K = 0.01 and
bin the iterates into an occupancy grid.  Plotting is optional.
"""
# %%
import numpy as np

from kickweb import MapParams, PortraitSpec, RandomInitials, magnify, render_portrait, symmetry_score
from kickweb.portrait import write_grid

grids = {}
for q in (3, 4, 5, 6, 7, 8):
    spec = PortraitSpec(MapParams.from_q(0.01, q), n_kicks=15_000, mode="grid", bins=(600, 600))
    grids[q] = render_portrait(spec, threads=4)
    g = grids[q]
    print(f"q={q}: {g.counts.sum()} iterates in view, {g.escaped_orbits} orbits escaped")

write_grid("portrait_q5.grid", grids[5])

# %%
# Symmetry score of the surviving cloud: matched q against q + 1.
spec = PortraitSpec(MapParams.from_q(0.01, 4), n_kicks=15_000, mode="points")
pts = render_portrait(spec).points
pts = pts[(np.abs(pts) <= 30).all(axis=1)]
print("score q=4:", symmetry_score(pts, 4), " q=5:", symmetry_score(pts, 5))

# %%
# A single random initial condition in (-0.5, 0.5)^2 and a zoom near the origin.
single = PortraitSpec(MapParams.from_q(0.01, 6), RandomInitials(1, seed=7), 15_000,
                      (-2, 2, -2, 2), "grid", (200, 200))
zoom = magnify(single, (-0.6, 0.6, -0.6, 0.6), refine=4)
print("zoom grid", zoom.bins, "occupied bins:", int((zoom.counts > 0).sum()))

# %%
try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None
if plt is not None:
    fig, axes = plt.subplots(2, 3, figsize=(10, 7))
    for ax, (q, g) in zip(axes.ravel(), grids.items()):
        ax.imshow(np.log1p(g.counts), origin="lower", extent=g.viewport, cmap="gray_r")
        ax.set_title(f"q = {q}")
    fig.savefig("portraits.png", dpi=120)
