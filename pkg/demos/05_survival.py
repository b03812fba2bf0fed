"""
Survival probability
====================
"""
# %%
from kickweb import MapParams, disk_ensemble, survival_probability

ens = disk_ensemble(center=(15.0, 0.0), radius=0.1, n=10_000, seed=1)
for K in (0.01, 0.1):
    c = survival_probability(ens, MapParams.from_q(K, 5), r_c=20.0, n_max=2000)
    print(f"K={K}: p_s[0..5] = {c.p_s[:6]}, final {c.p_s[-1]}")

# %%
# An ensemble closer to the origin decays gradually.
ens = disk_ensemble(center=(0.0, 0.0), radius=4.0, n=5000, seed=2)
c = survival_probability(ens, MapParams.from_q(0.3, 5), r_c=5.0, n_max=500)
print("p_s every 50 kicks:", c.p_s[::50].round(3))
