"""Why no sigma2-only model is hyperbolic.

Walks through the planar map phi = (x1, x2), then repeats the check on random
jets and random target metrics.
"""

import numpy as np

from pullback_hyperbolicity import (
    AFZ,
    MINKOWSKI as g,
    JetSample,
    TargetMetricSample,
    char_poly,
    degeneracy_report,
    eval_model,
    jet_strain,
    quadratic_forms,
)

np.set_printoptions(precision=4, suppress=True)

# The planar map: both target coordinates follow spatial base coordinates.
jet = JetSample.linear([[0, 1, 0, 0], [0, 0, 1, 0]])
h = TargetMetricSample.from_matrix(np.eye(2))
strain = jet_strain(jet, h, g)
print("strain invariants sigma1..sigma4:", strain.sigma)

xi = eval_model(AFZ, float(strain.sigma2)).xi
G1, G2 = quadratic_forms(jet, g, h, xi)
print("G1 =\n", G1)
print(f"G2 at xi = {xi} =\n", G2)

# The symbol determinant is the product of the two quadratic forms.
k = np.array([1.0, 0.3, -0.2, 0.5])
P = char_poly(jet, g, h, xi, k)
print(f"P(k) = {P:.6f},  det(h) P1 P2 = {float(h.det_h * (k @ G1 @ k) * (k @ G2 @ k)):.6f}")

v = degeneracy_report(jet, g, h, xi)
print("inertia of G1:", v.inertia_G1, " inertia of G2:", v.inertia_G2)
print("kernel of G1 (columns):\n", v.kernel_G1)
print("hyperbolic:", v.hyperbolic, v.notes)

# Random configurations: G1 always has the two map gradients in its kernel.
rng = np.random.default_rng(1)
worst, kernels = 0.0, 0
for _ in range(2000):
    jac = rng.uniform(-1, 1, (2, 4))
    A = rng.uniform(-1, 1, (2, 2))
    h = TargetMetricSample.from_matrix(A @ A.T + 0.1 * np.eye(2))
    G1, _ = quadratic_forms(JetSample.linear(jac), g, h, 0.0)
    worst = max(worst, abs(np.linalg.det(G1)) / np.abs(G1).max() ** 4)
    kernels += np.allclose(G1 @ jac.T, 0, atol=1e-12 * np.abs(G1).max())
print(f"\n2000 random jets: max |det G1| / |G1|^4 = {worst:.2e}, d(phi) in ker G1 for {kernels}/2000")
