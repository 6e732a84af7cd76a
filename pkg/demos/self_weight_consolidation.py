"""Self-weight consolidation of a very soft deposit (quasi-static).

Gravity is ramped on over the first tenth of a second, generating excess
pore pressure in the nearly undrained deposit; drainage through the
particle-tagged top and right surfaces then dissipates it while the
material settles at large strain. Time steps grow by 1.2x per step, so the
run covers minutes of consolidation in a few dozen implicit steps.
"""

import numpy as np

from porompm import build_scene, simulate

scene = build_scene("self_weight", scale=0.5, t_end=1.0e5)
scene.probes["bottom_center"] = (0.125, 0.125)

settle = []


def watch(rec, particles, history):
    settle.append((rec.t, float(np.abs(particles.x[:, 1] - particles.X[:, 1]).max())))


result = simulate(scene, observer=watch)
print(f"status {result.status}, steps {result.n_steps}, "
      f"final t = {result.records[-1].t:.0f} s")
print(f"dt range: {result.records[0].dt:.2f} .. {result.records[-1].dt:.0f} s")

print("\n   t [s]   settlement [m]")
for t, s in settle[:: max(1, len(settle) // 10)]:
    print(f"{t:9.1f}   {s:.3f}")

p = result.particles
print(f"\nfinal porosity range: [{p.phi.min():.3f}, {p.phi.max():.3f}] (from 0.5)")
series = [v for _, v in result.probes["bottom_center"] if v is not None]
print(f"bottom-center excess pressure: peak {max(series) / 1e3:.2f} kPa, "
      f"final {series[-1] / 1e3:.2f} kPa (dissipating)")
