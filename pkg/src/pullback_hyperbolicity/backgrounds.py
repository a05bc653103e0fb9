"""Analytic background maps and target geometries with closed-form derivatives."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChartDomainError
from .geometry import JetSample, TargetMetricSample

_EPS = np.finfo(float).eps
FD_STEP_FIRST = _EPS ** (1 / 3)


def _vec(v, n) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (n,):
        raise ValueError(f"expected {n} components, got shape {a.shape}")
    return a


def _point(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (4,):
        raise ValueError(f"base points need 4 components, got shape {x.shape}")
    return x


class Background:
    """A map from the base chart into the target chart.

    ``evaluate`` accepts a single point of shape ``(4,)`` or a stack of
    shape ``(..., 4)``.
    """

    family = "abstract"
    constant_jet = False

    def evaluate(self, x):
        """Return ``(phi, jac, hess)`` at base point(s) ``x``."""
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantMap(Background):
    y0: tuple = (0.0, 0.0)
    family = "constant_map"
    constant_jet = True

    def evaluate(self, x):
        batch = _point(x).shape[:-1]
        phi = np.broadcast_to(_vec(self.y0, 2), batch + (2,)).copy()
        return phi, np.zeros(batch + (2, 4)), np.zeros(batch + (2, 4, 4))

    def params(self):
        return {"y0": list(map(float, self.y0))}


@dataclass(frozen=True)
class LinearMap(Background):
    """``phi^A = y0^A + C^A_a x^a``."""

    C: tuple
    y0: tuple = (0.0, 0.0)
    family = "linear_map"
    constant_jet = True

    def evaluate(self, x):
        x = _point(x)
        batch = x.shape[:-1]
        C = np.asarray(self.C, dtype=float).reshape(2, 4)
        phi = _vec(self.y0, 2) + x @ C.T
        return phi, np.broadcast_to(C, batch + (2, 4)).copy(), np.zeros(batch + (2, 4, 4))

    def params(self):
        return {"C": np.asarray(self.C, dtype=float).reshape(2, 4).tolist(), "y0": list(map(float, self.y0))}


@dataclass(frozen=True)
class PlaneWave(Background):
    """``phi = (A sin(kappa.x), B cos(kappa.x))``: rank-one Jacobian, ``H = 0``."""

    A: float
    B: float
    kappa: tuple
    family = "plane_wave"

    def evaluate(self, x):
        kap = _vec(self.kappa, 4)
        th = _point(x) @ kap
        s, c = np.sin(th)[..., None], np.cos(th)[..., None]
        phi = np.concatenate([self.A * s, self.B * c], axis=-1)
        jac = np.stack([self.A * c * kap, -self.B * s * kap], axis=-2)
        kk = np.outer(kap, kap)
        hess = np.stack([-self.A * s[..., None] * kk, -self.B * c[..., None] * kk], axis=-3)
        return phi, jac, hess

    def params(self):
        return {"A": float(self.A), "B": float(self.B), "kappa": list(map(float, self.kappa))}


@dataclass(frozen=True)
class ProductWave(Background):
    """``phi = (A sin(kappa.x), B sin(mu.x))``; generic when kappa, mu independent."""

    A: float
    B: float
    kappa: tuple
    mu: tuple
    family = "product_wave"

    def __post_init__(self):
        if np.allclose(_vec(self.kappa, 4), _vec(self.mu, 4)):
            raise ValueError("product_wave needs kappa != mu")

    def evaluate(self, x):
        x = _point(x)
        kap, mu = _vec(self.kappa, 4), _vec(self.mu, 4)
        t1, t2 = (x @ kap)[..., None], (x @ mu)[..., None]
        phi = np.concatenate([self.A * np.sin(t1), self.B * np.sin(t2)], axis=-1)
        jac = np.stack([self.A * np.cos(t1) * kap, self.B * np.cos(t2) * mu], axis=-2)
        hess = np.stack(
            [
                -self.A * np.sin(t1)[..., None] * np.outer(kap, kap),
                -self.B * np.sin(t2)[..., None] * np.outer(mu, mu),
            ],
            axis=-3,
        )
        return phi, jac, hess

    def params(self):
        return {
            "A": float(self.A),
            "B": float(self.B),
            "kappa": list(map(float, self.kappa)),
            "mu": list(map(float, self.mu)),
        }


BACKGROUNDS = {cls.family: cls for cls in (ConstantMap, LinearMap, PlaneWave, ProductWave)}


class TargetGeometry:
    """Metric on the target chart.

    Every catalog metric has the form ``h = Omega(phi) * h0`` with constant
    ``h0``; subclasses provide ``conformal(phi) -> (Omega, dOmega/dy)``,
    vectorized over leading dimensions of ``phi``.
    """

    family = "abstract"
    h0 = np.eye(2)
    constant = False

    def check_domain(self, phi) -> None:
        pass

    def conformal(self, phi):
        phi = np.asarray(phi, dtype=float)
        return np.ones(phi.shape[:-1]), np.zeros(phi.shape)

    def metric_matrix(self, phi) -> np.ndarray:
        self.check_domain(phi)
        return np.asarray(self.conformal(phi)[0])[..., None, None] * self.h0

    def metric_derivative(self, phi) -> np.ndarray:
        """``d h_AB / d y^C`` stored as ``[..., C, A, B]``."""
        self.check_domain(phi)
        return self.conformal(phi)[1][..., :, None, None] * self.h0

    def metric(self, phi) -> TargetMetricSample:
        """Sample the metric at ``phi`` including the gradient of ``sqrt(det h)``."""
        self.check_domain(phi)
        omega, d_omega = self.conformal(phi)
        # sqrt(det(omega h0)) = omega sqrt(det h0) in two dimensions
        d_sqrt = d_omega * np.sqrt(np.linalg.det(self.h0))
        h = np.asarray(omega)[..., None, None] * self.h0
        return TargetMetricSample.from_matrix(h, d_sqrt_det=d_sqrt, check=False)

    def params(self) -> dict:
        return {}


class FlatTarget(TargetGeometry):
    family = "flat"
    constant = True


class SphereStereographic(TargetGeometry):
    """Round unit sphere in stereographic coordinates, ``4 delta / (1 + r^2)^2``."""

    family = "sphere_stereographic"

    def conformal(self, phi):
        phi = np.asarray(phi, dtype=float)
        d = 1.0 + np.sum(phi * phi, axis=-1)
        return 4.0 / d**2, -16.0 * phi / (d**3)[..., None]


class PoincareDisk(TargetGeometry):
    """Hyperbolic plane on the unit disk, ``4 delta / (1 - r^2)^2``."""

    family = "poincare_disk"

    def check_domain(self, phi):
        r2 = np.sum(np.asarray(phi, dtype=float) ** 2, axis=-1)
        if not np.all(r2 < 1.0):
            raise ChartDomainError(f"map value {np.asarray(phi).tolist()} is outside the Poincare disk")

    def conformal(self, phi):
        phi = np.asarray(phi, dtype=float)
        d = 1.0 - np.sum(phi * phi, axis=-1)
        return 4.0 / d**2, 16.0 * phi / (d**3)[..., None]


class CustomDiagonal(TargetGeometry):
    """Constant ``diag(c, 1/c)``; unit determinant like the flat metric."""

    family = "custom_diagonal"
    constant = True

    def __init__(self, c: float = 2.0):
        if not c > 0:
            raise ValueError("custom_diagonal needs c > 0")
        self.c = float(c)
        self.h0 = np.diag([self.c, 1.0 / self.c])

    def params(self):
        return {"c": self.c}


GEOMETRIES = {
    cls.family: cls for cls in (FlatTarget, SphereStereographic, PoincareDisk, CustomDiagonal)
}


def jet_eval(bg: Background, geom: TargetGeometry, x) -> tuple[JetSample, TargetMetricSample]:
    """Evaluate the jet of ``bg`` at ``x`` and the target metric at its value.

    Raises:
        ChartDomainError: the map value lies outside the target chart.
    """
    phi, jac, hess = bg.evaluate(x)
    h = geom.metric(phi)
    return JetSample(x=x, phi=phi, jac=jac, hess=hess), h


def _rel_dev(approx, exact) -> float:
    return float(np.abs(approx - exact).max() / max(1.0, np.abs(exact).max()))


def fd_check(bg: Background, geom: TargetGeometry, x) -> dict:
    """Central finite-difference audit of the closed-form derivatives at ``x``.

    Returns relative deviations for ``jac`` (step ``eps**(1/3)``), ``hess``
    (from differences of ``jac``, same step) and the target metric
    derivative, plus their maximum under ``"max"``.
    """
    x = _vec(x, 4)
    phi, jac, hess = bg.evaluate(x)
    geom.check_domain(phi)
    fd_jac = np.empty_like(jac)
    fd_hess = np.empty_like(hess)
    for a in range(4):
        step = FD_STEP_FIRST * (1 + abs(x[a]))
        e = np.zeros(4)
        e[a] = step
        p_plus, j_plus, _ = bg.evaluate(x + e)
        p_minus, j_minus, _ = bg.evaluate(x - e)
        fd_jac[:, a] = (p_plus - p_minus) / (2 * step)
        fd_hess[:, :, a] = (j_plus - j_minus) / (2 * step)
    dh = geom.metric_derivative(phi)
    fd_dh = np.empty_like(dh)
    for C in range(2):
        step = FD_STEP_FIRST * (1 + abs(phi[C]))
        e = np.zeros(2)
        e[C] = step
        fd_dh[C] = (geom.metric_matrix(phi + e) - geom.metric_matrix(phi - e)) / (2 * step)
    out = {
        "jac": _rel_dev(fd_jac, jac),
        "hess": _rel_dev(fd_hess, hess),
        "metric": _rel_dev(fd_dh, dh),
    }
    out["max"] = max(out.values())
    return out
