"""
From laboratory parameters to the map
=====================================
"""
# %%
from kickweb import OptomechanicalParams, PhaseState, check_regime, derive_scales, from_dimensionless

lab = OptomechanicalParams.from_hz(L=2e-3, delta_hz=1e7, m=50e-15, omega_hz=134e3,
                                   omega_A_hz=7e14, xi0=1e3, nu_hz=5 * 134e3)
sc = derive_scales(lab)
print(f"alpha = {sc.alpha:.5g} 1/m, K = {sc.K:.4g}, theta = {sc.theta:.5f}, q = {sc.q:g}")

# %%
# A dimensionless excursion of 20 is 20/alpha metres of membrane displacement.
print("x = 20 ->", from_dimensionless(PhaseState(20.0, 0.0), sc)[0], "m")
print(check_regime(lab, 20.0))
