"""Seeded random configurations for identity sweeps.

Each sample ``i`` draws from its own stream ``SeedSequence(seed, spawn_key=(i,))``
so a sweep is reproducible regardless of how samples are split across
workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import JetSample, TargetMetricSample

XI_RANGE = (-2.0, 2.0)
# |1 + xi sigma2| below this makes G2 singular; such xi are redrawn
XI_POLE_GAP = 1e-3


def sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def random_target_metric(rng: np.random.Generator) -> np.ndarray:
    """A random positive-definite 2x2 metric value (curved metrics pointwise)."""
    A = rng.uniform(-1.0, 1.0, size=(2, 2))
    return A @ A.T + 0.1 * np.eye(2)


@dataclass(frozen=True)
class SampleBatch:
    jac: np.ndarray  # (n, 2, 4)
    hess: np.ndarray  # (n, 2, 4, 4)
    h: np.ndarray  # (n, 2, 2)
    xi: np.ndarray  # (n,)
    k: np.ndarray  # (n, 4)
    H_generic: np.ndarray  # (n, 4, 4), antisymmetric, not a pullback
    f: np.ndarray  # (n,)

    def __len__(self) -> int:
        return len(self.xi)

    @property
    def jets(self) -> JetSample:
        n = len(self)
        return JetSample(x=np.zeros((n, 4)), phi=np.zeros((n, 2)), jac=self.jac, hess=self.hess)

    @property
    def target(self) -> TargetMetricSample:
        return TargetMetricSample.from_matrix(self.h)


def draw_sample(rng: np.random.Generator, g_inv: np.ndarray | None = None) -> dict:
    """One random configuration: Jacobian entries uniform in [-1, 1]."""
    g_inv = np.diag([1.0, -1.0, -1.0, -1.0]) if g_inv is None else g_inv
    jac = rng.uniform(-1.0, 1.0, size=(2, 4))
    hess = rng.uniform(-1.0, 1.0, size=(2, 4, 4))
    hess = 0.5 * (hess + np.swapaxes(hess, -1, -2))
    h = random_target_metric(rng)
    # sigma2 = det(h) det(jac g^-1 jac^T); only used to steer xi away from poles
    sigma2 = np.linalg.det(h) * np.linalg.det(jac @ g_inv @ jac.T)
    while True:
        xi = rng.uniform(*XI_RANGE)
        if abs(1 + xi * sigma2) > XI_POLE_GAP:
            break
    k = rng.normal(size=4)
    B = rng.normal(size=(4, 4))
    return {
        "jac": jac,
        "hess": hess,
        "h": h,
        "xi": xi,
        "k": k,
        "H_generic": B - B.T,
        "f": rng.uniform(-2.0, 2.0),
    }


def draw_batch(seed: int, n: int, start: int = 0) -> SampleBatch:
    """Samples ``start .. start + n - 1`` of the stream family keyed by ``seed``."""
    draws = [draw_sample(sample_rng(seed, i)) for i in range(start, start + n)]
    return SampleBatch(**{key: np.array([d[key] for d in draws]) for key in draws[0]})
