import numpy as np
import pytest

from pullback_hyperbolicity.backgrounds import Background
from pullback_hyperbolicity.geometry import EUCLIDEAN_TARGET, MINKOWSKI, JetSample, TargetMetricSample
from pullback_hyperbolicity.sampling import random_target_metric

# phi = (x1, x2): the planar identity-like map used as the hand-checked example
W1_JAC = np.array([[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def w1():
    return JetSample.linear(W1_JAC)


@pytest.fixture
def flat():
    return EUCLIDEAN_TARGET


@pytest.fixture
def g():
    return MINKOWSKI


def random_jet(rng, n=None, hess=True):
    shape = () if n is None else (n,)
    jac = rng.uniform(-1, 1, size=shape + (2, 4))
    H = None
    if hess:
        H = rng.uniform(-1, 1, size=shape + (2, 4, 4))
        H = 0.5 * (H + np.swapaxes(H, -1, -2))
    return JetSample(x=np.zeros(shape + (4,)), phi=np.zeros(shape + (2,)), jac=jac, hess=H)


def random_target(rng, n=None):
    if n is None:
        return TargetMetricSample.from_matrix(random_target_metric(rng))
    return TargetMetricSample.from_matrix(np.array([random_target_metric(rng) for _ in range(n)]))


def random_antisymmetric(rng, n=None):
    shape = () if n is None else (n,)
    B = rng.normal(size=shape + (4, 4))
    return B - np.swapaxes(B, -1, -2)


class Chirp(Background):
    """Test-only map whose jet is not constant along characteristic rays.

    ``phi = (sin(kappa.x + a (n.x)^2), sin(m.x))``.  The quadratic phase makes
    ``H^2 / sigma2`` vary, which the catalog waves never do.
    """

    family = "chirp"

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
        outer = dt[..., :, None] * dt[..., None, :]
        h0 = -np.sin(t)[..., None] * outer + 2 * self.a * np.cos(t)[..., None] * np.outer(self.n, self.n)
        h1 = -np.sin(s)[..., None] * np.outer(self.m, self.m)
        return phi, jac, np.stack([h0, h1], axis=-3)

    def params(self):
        return {"a": self.a}
