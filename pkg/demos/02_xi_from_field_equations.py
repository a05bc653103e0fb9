"""Reading the nonlinearity parameter off the field equations themselves.

The field equations are affine in the second derivatives of the map, so a
unit bump of the Hessian in direction k (x) k gives their principal symbol
exactly.  It should match L2 times the area form times the symbol built
from (jet, xi).  Only one normalization of xi makes that true.
"""

import numpy as np

from pullback_hyperbolicity import AFZ, MINKOWSKI as g, JetSample, TargetMetricSample, eom_residual, eval_model, jet_strain, symbol

rng = np.random.default_rng(7)
while True:
    jac = rng.uniform(-1, 1, (2, 4))
    hess = rng.uniform(-1, 1, (2, 4, 4))
    jet = JetSample(np.zeros(4), np.zeros(2), jac, 0.5 * (hess + hess.transpose(0, 2, 1)))
    h = TargetMetricSample.from_matrix(np.eye(2))
    s2 = float(jet_strain(jet, h, g).sigma2)
    if s2 > 0.1:
        break

k = rng.normal(size=4)
E0 = eom_residual(jet, g, h, AFZ)
T = np.empty((2, 2))
for B in range(2):
    bumped = jet.hess.copy()
    bumped[B] += np.outer(k, k)
    T[:, B] = eom_residual(JetSample(jet.x, jet.phi, jet.jac, bumped), g, h, AFZ) - E0

ev = eval_model(AFZ, s2)
eps_up = np.array([[0.0, 1.0], [-1.0, 0.0]]) / float(h.sqrt_det)
print(f"sigma2 = {s2:.4f}, L2 = {ev.L2:.4f}, L22 = {ev.L22:.4f}")
for label, xi in (("2 L22 / L2", 2 * ev.L22 / ev.L2), ("L22 / L2", ev.L22 / ev.L2)):
    mismatch = np.abs(T - ev.L2 * eps_up @ symbol(jet, g, h, xi, k)).max()
    print(f"xi = {label:>10} = {xi:+.5f}: mismatch {mismatch:.2e}")
