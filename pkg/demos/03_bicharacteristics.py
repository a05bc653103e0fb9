"""Tracing rays of both branches.

Three situations:

1. the planar map, where branch-1 rays only move in the (x0, x3) plane and
   covectors in the kernel of G1 do not move at all;
2. a product wave, whose rays turn out to be straight lines;
3. a wave with a quadratic phase, where the rays bend and RK4's fourth
   order shows up when the step is halved.
"""

import numpy as np

from pullback_hyperbolicity import AFZ, STRONGLY_COUPLED, FlatTarget, LinearMap, ProductWave, integrate_ray, null_project
from pullback_hyperbolicity.backgrounds import Background
from pullback_hyperbolicity.rays import BranchField

np.set_printoptions(precision=4, suppress=True)

planar = LinearMap(((0, 1, 0, 0), (0, 0, 1, 0)))
field = BranchField(planar, FlatTarget(), STRONGLY_COUPLED, branch=1)
k = null_project(field, np.zeros(4), [0.0, 0.0, 1.0]).k
tr = integrate_ray(field, np.zeros(4), k, span=2.0, step=0.5)
print("planar map, branch 1, k =", k)
print(tr.x)
stuck = integrate_ray(field, np.zeros(4), [0.0, 1.0, 1.0, 0.0])
print("kernel covector:", stuck.termination, "-", stuck.notes[0])

wave = ProductWave(0.8, 0.6, (0.3, 1.0, 0.0, 0.0), (0.2, 0.0, 1.0, 0.0))
x0 = np.array([0.0, 0.3, -0.2, 0.1])
for branch, model in ((1, STRONGLY_COUPLED), (2, AFZ)):
    f = BranchField(wave, FlatTarget(), model, branch)
    k0 = null_project(f, x0, [0.3, 0.8, -0.5]).k
    tr = integrate_ray(f, x0, k0, span=4.0, step=0.05)
    bend = np.abs(np.diff(tr.x, 2, axis=0)).max()
    print(f"\nproduct wave, branch {branch}: second differences of x(lambda) {bend:.1e}, drift {tr.drift:.1e}")


class QuadraticPhase(Background):
    """phi = (sin(kappa.x + a (n.x)^2), sin(m.x))."""

    family = "quadratic_phase"

    def __init__(self, a=0.3):
        self.a = a
        self.kap = np.array([0.3, 1.0, 0.2, 0.0])
        self.n = np.array([0.0, 0.2, 0.5, 0.7])
        self.m = np.array([0.1, 0.0, 0.9, 0.5])

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        u = (x @ self.n)[..., None]
        t = (x @ self.kap)[..., None] + self.a * u**2
        s = (x @ self.m)[..., None]
        dt = self.kap + 2 * self.a * u * self.n
        phi = np.concatenate([np.sin(t), np.sin(s)], axis=-1)
        jac = np.stack([np.cos(t) * dt, np.cos(s) * self.m], axis=-2)
        h0 = -np.sin(t)[..., None] * (dt[..., :, None] * dt[..., None, :]) + 2 * self.a * np.cos(t)[..., None] * np.outer(self.n, self.n)
        h1 = -np.sin(s)[..., None] * np.outer(self.m, self.m)
        return phi, jac, np.stack([h0, h1], axis=-3)


f = BranchField(QuadraticPhase(), FlatTarget(), AFZ, 2, gradient="analytic")
k0 = null_project(f, x0, [0.3, 0.8, -0.5]).k
print("\nquadratic phase, branch 2")
prev = None
for step in (0.2, 0.1, 0.05, 0.025):
    d = integrate_ray(f, x0, k0, span=5.0, step=step).drift
    print(f"  step {step:<6} drift {d:.3e}" + (f"  ratio {prev / d:.1f}" if prev else ""))
    prev = d
