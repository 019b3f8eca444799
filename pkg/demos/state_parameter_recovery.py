"""
Which state was that?
======================

Measured (visibility, violation fraction) pairs trace out a curve whose
shape depends on the state family parameters.  Given points on a
rescaled visibility curve, a grid search plus simplex refinement
recovers the underlying entangling angle theta and the source visibility
v0.  Here we generate a curve from known parameters, perturb it a
little, and see how well they come back.
"""

import numpy as np

from bellent.fits import estimate_theta_v0, g1, g2, g3, v3cr

rng = np.random.default_rng(5)

theta_true = np.deg2rad(38.0)
v0_true = 0.97

pv = np.linspace(0.5, 10.0, 30)  # percent
v = (v3cr(theta_true) + g1(theta_true) * pv ** (1 / 6)
     + g2(theta_true) * np.sqrt(pv) + g3(theta_true) * pv) / v0_true

for noise in (0.0, 1e-4, 1e-3):
    vn = v + noise * rng.standard_normal(v.size)
    theta, v0, rms = estimate_theta_v0(list(zip(vn, pv)))
    print(f"noise {noise:7.0e}: theta = {np.rad2deg(theta):7.3f} deg "
          f"(true {np.rad2deg(theta_true):.1f}), v0 = {v0:.4f} "
          f"(true {v0_true}), rms = {rms:.2e}")
