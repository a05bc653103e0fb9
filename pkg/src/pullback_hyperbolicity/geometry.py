"""First-jet tensor algebra on a (1+3)-dimensional base with a 2-dimensional target.

Index conventions used throughout the package:

* base indices ``a, b = 0..3``, signature ``(+, -, -, -)``;
* target indices ``A, B = 0..1`` (the two target coordinates);
* a Jacobian is stored as ``jac[..., A, a] = d phi^A / d x^a``;
* a Hessian is stored as ``hess[..., A, a, b]``.

Every function broadcasts over leading batch dimensions, so a stack of
``n`` jets is processed with the same call as a single jet.

The Levi-Civita objects are weighted tensors rather than bare symbols::

    eps_AB      = sqrt(det h)  [AB],        [01] = +1
    eta_abcd    = sqrt(-det g) [abcd],      [0123] = +1
    eta^abcd    = -[abcd] / sqrt(-det g)

With this weighting ``H_ab H^ab = 2 sigma_2`` holds for every pullback form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations

import numpy as np

BASE_DIM = 4
TARGET_DIM = 2


@lru_cache(maxsize=None)
def levi_civita_symbol(n: int) -> np.ndarray:
    """Return the totally antisymmetric symbol with ``[0, 1, ..., n-1] = +1``."""
    eps = np.zeros((n,) * n)
    for perm in permutations(range(n)):
        inversions = sum(
            1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j]
        )
        eps[perm] = -1.0 if inversions % 2 else 1.0
    eps.setflags(write=False)
    return eps


def _as_float(a) -> np.ndarray:
    return np.asarray(a, dtype=float)


@dataclass(frozen=True)
class MetricSample:
    """Base metric at a point (or a stack of points)."""

    g: np.ndarray
    g_inv: np.ndarray
    sqrt_neg_det: np.ndarray

    @classmethod
    def from_matrix(cls, g, check: bool = True) -> "MetricSample":
        g = _as_float(g)
        if g.shape[-2:] != (BASE_DIM, BASE_DIM):
            raise ValueError(f"base metric must be 4x4, got {g.shape}")
        if check:
            if not np.allclose(g, np.swapaxes(g, -1, -2), rtol=0, atol=1e-12 * max(1.0, np.abs(g).max())):
                raise ValueError("base metric is not symmetric")
            ev = np.linalg.eigvalsh(g)
            if np.any((ev > 0).sum(axis=-1) != 1) or np.any((ev < 0).sum(axis=-1) != 3):
                raise ValueError("base metric must have signature (+,-,-,-)")
        det = np.linalg.det(g)
        return cls(g=g, g_inv=np.linalg.inv(g), sqrt_neg_det=np.sqrt(-np.asarray(det)))

    @property
    def det(self) -> np.ndarray:
        return -self.sqrt_neg_det**2


MINKOWSKI = MetricSample.from_matrix(np.diag([1.0, -1.0, -1.0, -1.0]))


@dataclass(frozen=True)
class TargetMetricSample:
    """Target metric evaluated at the map value.

    ``d_sqrt_det`` holds the target-coordinate gradient of ``sqrt(det h)``;
    it only matters for the field-equation residual and defaults to zero
    (a metric with constant determinant in the chart).
    """

    h: np.ndarray
    h_inv: np.ndarray
    det_h: np.ndarray
    d_sqrt_det: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.d_sqrt_det is None:
            object.__setattr__(
                self, "d_sqrt_det", np.zeros(self.h.shape[:-2] + (TARGET_DIM,))
            )

    @classmethod
    def from_matrix(cls, h, d_sqrt_det=None, check: bool = True) -> "TargetMetricSample":
        h = _as_float(h)
        if h.shape[-2:] != (TARGET_DIM, TARGET_DIM):
            raise ValueError(f"target metric must be 2x2, got {h.shape}")
        if check and np.any(np.linalg.eigvalsh(h) <= 0):
            raise ValueError("target metric must be positive definite")
        d = None if d_sqrt_det is None else _as_float(d_sqrt_det)
        return cls(h=h, h_inv=np.linalg.inv(h), det_h=np.asarray(np.linalg.det(h)), d_sqrt_det=d)

    @property
    def sqrt_det(self) -> np.ndarray:
        return np.sqrt(self.det_h)


EUCLIDEAN_TARGET = TargetMetricSample.from_matrix(np.eye(2))


@dataclass(frozen=True)
class JetSample:
    """Value and derivatives of the map at a base point."""

    x: np.ndarray
    phi: np.ndarray
    jac: np.ndarray
    hess: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "x", _as_float(self.x))
        object.__setattr__(self, "phi", _as_float(self.phi))
        object.__setattr__(self, "jac", _as_float(self.jac))
        if self.jac.shape[-2:] != (TARGET_DIM, BASE_DIM):
            raise ValueError(f"jac must have trailing shape (2, 4), got {self.jac.shape}")
        if self.hess is not None:
            hess = _as_float(self.hess)
            if hess.shape[-3:] != (TARGET_DIM, BASE_DIM, BASE_DIM):
                raise ValueError(f"hess must have trailing shape (2, 4, 4), got {hess.shape}")
            scale = max(1.0, float(np.abs(hess).max(initial=0.0)))
            if np.abs(hess - np.swapaxes(hess, -1, -2)).max(initial=0.0) > 1e-12 * scale:
                raise ValueError("hess is not symmetric in its base indices")
            object.__setattr__(self, "hess", hess)

    @classmethod
    def linear(cls, jac, x=None, phi=None) -> "JetSample":
        """Jet of an affine map: constant Jacobian, vanishing Hessian."""
        jac = _as_float(jac)
        batch = jac.shape[:-2]
        x = np.zeros(batch + (BASE_DIM,)) if x is None else x
        phi = np.zeros(batch + (TARGET_DIM,)) if phi is None else phi
        return cls(x=x, phi=phi, jac=jac, hess=np.zeros(batch + (TARGET_DIM, BASE_DIM, BASE_DIM)))


@dataclass(frozen=True)
class StrainData:
    L_lower: np.ndarray
    L_mixed: np.ndarray
    sigma: np.ndarray  # (..., 4): sigma_1 .. sigma_4

    @property
    def sigma2(self) -> np.ndarray:
        return self.sigma[..., 1]


@dataclass(frozen=True)
class PullbackForm:
    """An antisymmetric two-form together with its index variants.

    ``H_mixed[a, b] = H^a_b``, ``Hsq_mixed = H^a_c H^c_b``.  ``HH`` is the
    full contraction ``H_ab H^ab`` and ``HdH`` is ``H_ab (*H)^ab``.
    """

    H_lower: np.ndarray
    H_mixed: np.ndarray
    H_upper: np.ndarray
    Hsq_mixed: np.ndarray
    HH: np.ndarray
    HdH: np.ndarray

    @classmethod
    def from_lower(cls, H_lower, g: MetricSample = MINKOWSKI) -> "PullbackForm":
        """Build all variants from any antisymmetric ``H_ab``, pullback or not."""
        H_lower = _as_float(H_lower)
        H_mixed = g.g_inv @ H_lower
        H_upper = H_mixed @ g.g_inv
        dual = hodge_dual(H_lower, g)
        return cls(
            H_lower=H_lower,
            H_mixed=H_mixed,
            H_upper=H_upper,
            Hsq_mixed=H_mixed @ H_mixed,
            HH=np.einsum("...ab,...ab->...", H_lower, H_upper),
            HdH=np.einsum("...ab,...ab->...", H_lower, dual),
        )


def area_form(h: TargetMetricSample) -> np.ndarray:
    """Lower-index area form ``eps_AB = sqrt(det h) [AB]``."""
    return h.sqrt_det[..., None, None] * levi_civita_symbol(TARGET_DIM)


def volume_form_upper(g: MetricSample) -> np.ndarray:
    """Upper-index volume form ``eta^abcd = -[abcd] / sqrt(-det g)``."""
    return -levi_civita_symbol(BASE_DIM) / g.sqrt_neg_det[..., None, None, None, None]


def pullback_metric(jet: JetSample, h: TargetMetricSample) -> np.ndarray:
    """Pulled-back metric ``L_ab = h_AB phi^A_a phi^B_b``."""
    return np.einsum("...AB,...Aa,...Bb->...ab", h.h, jet.jac, jet.jac)


def elementary_symmetric(L_mixed: np.ndarray) -> np.ndarray:
    """sigma_1..sigma_3 from trace formulas, sigma_4 as the determinant."""
    L = _as_float(L_mixed)
    L2 = L @ L
    t1 = np.trace(L, axis1=-2, axis2=-1)
    t2 = np.trace(L2, axis1=-2, axis2=-1)
    t3 = np.einsum("...ab,...ba->...", L2, L)
    s1 = t1
    s2 = (t1**2 - t2) / 2
    s3 = (t1**3 - 3 * t1 * t2 + 2 * t3) / 6
    s4 = np.linalg.det(L)
    return np.stack([s1, s2, s3, s4], axis=-1)


def strain_and_invariants(L_lower, g: MetricSample = MINKOWSKI) -> StrainData:
    L_lower = _as_float(L_lower)
    L_mixed = g.g_inv @ L_lower
    return StrainData(L_lower=L_lower, L_mixed=L_mixed, sigma=elementary_symmetric(L_mixed))


def jet_strain(jet: JetSample, h: TargetMetricSample, g: MetricSample = MINKOWSKI) -> StrainData:
    return strain_and_invariants(pullback_metric(jet, h), g)


def _max_abs(a: np.ndarray) -> np.ndarray:
    return np.abs(a).max(axis=(-2, -1))


def cayley_hamilton_residual(strain: StrainData) -> np.ndarray:
    """Normalized residual of ``L^4 - sigma_1 L^3 + sigma_2 L^2``.

    For a two-dimensional target the strain has rank at most two, so the
    quartic Cayley-Hamilton relation collapses to this three-term form.
    Norms are max-abs entry norms; the result is divided by
    ``(1 + |L|)^4``.
    """
    L = strain.L_mixed
    L2 = L @ L
    L3 = L2 @ L
    L4 = L3 @ L
    s1 = strain.sigma[..., 0, None, None]
    s2 = strain.sigma[..., 1, None, None]
    return _max_abs(L4 - s1 * L3 + s2 * L2) / (1 + _max_abs(L)) ** 4


def pullback_two_form(
    jet: JetSample, h: TargetMetricSample, g: MetricSample = MINKOWSKI
) -> PullbackForm:
    """Pullback of the target area form, ``H_ab = eps_AB phi^A_a phi^B_b``."""
    H_lower = np.einsum("...AB,...Aa,...Bb->...ab", area_form(h), jet.jac, jet.jac)
    # exact antisymmetry regardless of rounding in the einsum
    H_lower = 0.5 * (H_lower - np.swapaxes(H_lower, -1, -2))
    return PullbackForm.from_lower(H_lower, g)


def hodge_dual(H, g: MetricSample = MINKOWSKI) -> np.ndarray:
    """Upper-index dual ``(*H)^ab = 1/2 eta^abcd H_cd``.

    ``H`` may be a :class:`PullbackForm` or a lower-index antisymmetric array.
    Lower the result with ``g`` and dualize again to get ``-H^ab`` back.
    """
    H_lower = H.H_lower if isinstance(H, PullbackForm) else _as_float(H)
    return 0.5 * np.einsum("...abcd,...cd->...ab", volume_form_upper(g), H_lower)


def lower_indices(T_upper: np.ndarray, g: MetricSample = MINKOWSKI) -> np.ndarray:
    return g.g @ T_upper @ g.g
