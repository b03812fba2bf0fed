"""
The kicked-membrane web map
===========================

One kick period = a momentum kick ``p -> p + K sinh(x)`` followed by a free
rotation of the phase plane.  This script steps the map by hand, checks the
complex form against the real one and iterates an orbit.
"""
# %%
import math

from kickweb import MapParams, PhaseState, iterate, kick, rotate, step, step_complex

# q = 4 means a quarter turn between kicks
params = MapParams.from_q(K=0.01, q=4)
print(params, "a =", params.a, "b =", params.b)

s = PhaseState(1.0, 0.0)
print("kick   :", kick(s, params.K))
print("rotate :", rotate(kick(s, params.K), params.theta))
print("step   :", step(s, params))

# %%
# The complex variable z = x + i p carries the same map.
z = s.to_complex()
print("complex step:", step_complex(z, params))

# %%
# Without kicks the orbit is a pure rotation and closes after q steps.
orbit = iterate(PhaseState(1.0, 0.0), MapParams.from_q(0.0, 4), n=4)
for k, st in enumerate(orbit.states):
    print(k, f"({st.x:+.3f}, {st.p:+.3f})")

# %%
# Orbits far from the origin are thrown out by the exponential kick.
orbit = iterate(PhaseState(15.0, 0.0), MapParams.from_q(0.5, 5), n=10_000)
print("escaped:", orbit.escaped, "at kick", orbit.escape_kick, "last state", orbit.last_state)

orbit = iterate(PhaseState(1.0, 0.0), MapParams.from_q(0.5, 5), n=10_000, record_every=1000)
print("bounded orbit, radius every 1000 kicks:",
      [round(math.hypot(*st), 3) for st in orbit.states])
