"""
Inside the inequality catalog
==============================

Bell inequalities are stored as coefficient tables plus a local bound;
relabeling outputs, settings, or parties maps each inequality to an
orbit of equivalent forms that all get checked against a behavior.  The
script prints the bundled families, expands their orbits, and shows the
quantum/classical gap at canonical settings (values are normalized, so
violation means I > 1).
"""

import numpy as np

from bellent.bell import (MeasurementSettings, behavior_from_state, chsh,
                          expand_relabelings, max_violation, mermin,
                          svetlichny)
from bellent.qstate import gghz

for ineq in (chsh(), mermin(), svetlichny()):
    orbit = expand_relabelings([ineq])
    print(f"{ineq.name:12s} parties={ineq.n_parties} "
          f"bound={ineq.lhv_bound} orbit={len(orbit.inequalities)}")

# CHSH at the Tsirelson settings: normalized value sqrt(2)
z, x = np.array([0, 0, 1.0]), np.array([1.0, 0, 0])
m2 = MeasurementSettings(2, [[z, x], [(x + z) / np.sqrt(2),
                                      (-x + z) / np.sqrt(2)]])
beh = behavior_from_state(gghz(np.pi / 4, 2).projector(), m2)
val = max_violation(beh, expand_relabelings([chsh()]))
print(f"\nCHSH at optimal settings: I = {val:.6f} "
      f"(Tsirelson bound {np.sqrt(2):.6f})")

# GHZ against Svetlichny: equatorial settings at the right phases reach
# the algebraic maximum, random ones rarely get close
svet = expand_relabelings([svetlichny()])
ghz = gghz(np.pi / 4, 3).projector()


def equatorial(phases):
    return [[(np.cos(p), np.sin(p), 0.0) for p in party] for party in phases]


opt = MeasurementSettings(3, equatorial(
    [(0, np.pi / 2), (0, np.pi / 2), (np.pi / 4, 3 * np.pi / 4)]))
print(f"Svetlichny at optimal settings: I = "
      f"{max_violation(behavior_from_state(ghz, opt), svet):.6f}")

rng = np.random.default_rng(1)
best = 0.0
for _ in range(200):
    d = rng.standard_normal((3, 2, 3))
    d /= np.linalg.norm(d, axis=-1, keepdims=True)
    beh = behavior_from_state(ghz, MeasurementSettings(3, d))
    best = max(best, max_violation(beh, svet))
print(f"Svetlichny over 200 random settings: best I = {best:.4f} "
      f"(algebraic max sqrt(2) = {np.sqrt(2):.4f})")
