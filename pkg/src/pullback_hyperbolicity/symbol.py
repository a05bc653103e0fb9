"""Principal part, principal symbol and the factorized characteristic polynomial.

The field equations ``d_a(sqrt(-g) L2 H^ab) phi^A_b = 0`` are quasilinear.
Their principal part contracted twice with a covector ``k`` gives a 2x2
symbol whose determinant is a quartic in ``k``.  That quartic factors as
``det(h) * P1(k) * P2(k)`` with the two quadratic forms

    G1^ab = sigma_2 g^ab + H^a_c H^cb
    G2^ab = g^ab - xi H^a_c H^cb

and ``G1`` is always singular, which rules out hyperbolicity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MissingHessian
from .geometry import (
    MINKOWSKI,
    JetSample,
    MetricSample,
    PullbackForm,
    TargetMetricSample,
    area_form,
    jet_strain,
    levi_civita_symbol,
    pullback_two_form,
)
from .models import PowerModel, eval_model

DEFAULT_RANK_TOL = 1e-9
LORENTZIAN = ((1, 0, 3), (3, 0, 1))


def _xi(xi) -> np.ndarray:
    return np.asarray(xi, dtype=float)


def gradient_upper(jet: JetSample, g: MetricSample = MINKOWSKI) -> np.ndarray:
    """``d^a phi^P`` stored as ``[..., P, a]``."""
    return np.einsum("...ab,...Pb->...Pa", g.g_inv, jet.jac)


def n_matrix(jet: JetSample, g: MetricSample, h: TargetMetricSample) -> np.ndarray:
    """``N_AB = eps_AP eps_BQ d_c phi^P d^c phi^Q``."""
    eps = area_form(h)
    S = np.einsum("...Pc,...Qc->...PQ", jet.jac, gradient_upper(jet, g))
    return np.einsum("...AP,...BQ,...PQ->...AB", eps, eps, S)


@dataclass(frozen=True)
class PrincipalPart:
    M: np.ndarray  # [..., a, b, A, B]
    N: np.ndarray  # [..., A, B]


def principal_part(jet: JetSample, g: MetricSample, h: TargetMetricSample, xi) -> PrincipalPart:
    """Coefficient tensor of the second derivatives in the field equations."""
    eps = area_form(h)
    N = n_matrix(jet, g, h)
    D = gradient_upper(jet, g)
    DD = np.einsum("...Pa,...Qb->...abPQ", D, D)
    sym = 0.5 * (DD + np.swapaxes(DD, -1, -2))
    coef = np.einsum("...AP,...BQ->...ABPQ", eps, eps) - _xi(xi)[..., None, None, None, None] * np.einsum(
        "...AP,...BQ->...ABPQ", N, N
    )
    M = np.einsum("...ABPQ,...abPQ->...abAB", coef, sym)
    M = M - g.g_inv[..., :, :, None, None] * N[..., None, None, :, :]
    M = 0.5 * (M + np.swapaxes(M, -3, -4))
    M = 0.5 * (M + np.swapaxes(M, -1, -2))
    return PrincipalPart(M=M, N=N)


def symbol(jet: JetSample, g: MetricSample, h: TargetMetricSample, xi, k) -> np.ndarray:
    """Closed-form principal symbol ``M_AB(k)``.

    ``|l|^2 h_AB - |k|^2 N_AB - l_A l_B - xi (N l)_A (N l)_B`` with
    ``l^P = d^a phi^P k_a``.  Shares no code with the contraction of
    :func:`principal_part`, so the two can be checked against each other.
    """
    k = np.asarray(k, dtype=float)
    N = n_matrix(jet, g, h)
    ell_up = np.einsum("...Pa,...a->...P", gradient_upper(jet, g), k)
    ell_low = np.einsum("...AP,...P->...A", h.h, ell_up)
    ell_sq = np.einsum("...P,...P->...", ell_up, ell_low)
    k_sq = np.einsum("...ab,...a,...b->...", g.g_inv, k, k)
    Nl = np.einsum("...AP,...P->...A", N, ell_up)
    outer = lambda u: u[..., :, None] * u[..., None, :]  # noqa: E731
    return (
        ell_sq[..., None, None] * h.h
        - k_sq[..., None, None] * N
        - outer(ell_low)
        - _xi(xi)[..., None, None] * outer(Nl)
    )


def contract_symbol(pp: PrincipalPart, k) -> np.ndarray:
    """``M^ab_AB k_a k_b``."""
    return np.einsum("...abAB,...a,...b->...AB", pp.M, k, k)


def _det2(m: np.ndarray) -> np.ndarray:
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def char_poly(jet: JetSample, g: MetricSample, h: TargetMetricSample, xi, k) -> np.ndarray:
    """Characteristic polynomial ``P(k) = det M_AB(k)``, homogeneous of degree four."""
    return _det2(symbol(jet, g, h, xi, k))


def quadratic_forms(jet: JetSample, g: MetricSample, h: TargetMetricSample, xi):
    """Return ``(G1, G2)`` as contravariant 4x4 arrays."""
    H = pullback_two_form(jet, h, g)
    sigma2 = jet_strain(jet, h, g).sigma2
    HH = H.H_mixed @ H.H_upper
    HH = 0.5 * (HH + np.swapaxes(HH, -1, -2))
    G1 = sigma2[..., None, None] * g.g_inv + HH
    G2 = g.g_inv - _xi(xi)[..., None, None] * HH
    return G1, G2


def quadratic_value(G: np.ndarray, k) -> np.ndarray:
    return np.einsum("...ab,...a,...b->...", G, k, k)


def quartic_form(G1: np.ndarray, G2: np.ndarray, det_h) -> np.ndarray:
    """Totally symmetric ``G^abcd = det(h) sym(G1 (x) G2)``."""
    t = np.einsum("...ab,...cd->...abcd", G1, G2)
    # each of the three index pairings, once with G1 on either pair
    pairings = (
        t
        + np.einsum("...cdab->...abcd", t)
        + np.einsum("...acbd->...abcd", t)
        + np.einsum("...bdac->...abcd", t)
        + np.einsum("...adbc->...abcd", t)
        + np.einsum("...bcad->...abcd", t)
    )
    return np.asarray(det_h)[..., None, None, None, None] * pairings / 6.0


def eval_quartic(G4: np.ndarray, k) -> np.ndarray:
    return np.einsum("...abcd,...a,...b,...c,...d->...", G4, k, k, k, k)


@dataclass(frozen=True)
class QuarticForm:
    """Totally symmetric rank-4 characteristic tensor ``G^abcd``."""

    G4: np.ndarray

    @classmethod
    def from_forms(cls, G1, G2, det_h) -> "QuarticForm":
        return cls(quartic_form(G1, G2, det_h))

    def __call__(self, k) -> np.ndarray:
        return eval_quartic(self.G4, k)

    def independent_components(self) -> np.ndarray:
        """The 35 entries with ``a <= b <= c <= d``."""
        idx = [(a, b, c, d) for a in range(4) for b in range(a, 4) for c in range(b, 4) for d in range(c, 4)]
        return np.stack([self.G4[..., a, b, c, d] for a, b, c, d in idx], axis=-1)


def factorization_residual(jet: JetSample, g: MetricSample, h: TargetMetricSample, xi, k) -> np.ndarray:
    """``|P(k) - det(h) P1(k) P2(k)| / (1 + |P(k)|)``."""
    P = char_poly(jet, g, h, xi, k)
    G1, G2 = quadratic_forms(jet, g, h, xi)
    prod = h.det_h * quadratic_value(G1, k) * quadratic_value(G2, k)
    return np.abs(P - prod) / (1 + np.abs(P))


def determinant_identity(H: PullbackForm, f):
    """Check ``det(delta + f H^2) = U^2`` for an antisymmetric two-form.

    ``U = 1 - (f/2) H_ab H^ab - (f^2/16) (H_ab *H^ab)^2``.  Holds for any
    antisymmetric ``H`` on a Lorentzian four-dimensional base.

    Returns:
        ``(lhs, U, residual)`` with ``residual = |lhs - U^2|``.
    """
    f = np.asarray(f, dtype=float)
    lhs = np.linalg.det(np.eye(4) + f[..., None, None] * H.Hsq_mixed)
    U = 1 - 0.5 * f * H.HH - f**2 / 16 * H.HdH**2
    return lhs, U, np.abs(lhs - U**2)


def inertia(G: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> tuple[int, int, int]:
    """Sylvester inertia ``(n+, n0, n-)`` with a relative zero threshold."""
    ev = np.linalg.eigvalsh(G)
    thr = rank_tol * np.abs(ev).max()
    return int((ev > thr).sum()), int((np.abs(ev) <= thr).sum()), int((ev < -thr).sum())


@dataclass(frozen=True)
class QuadraticForm:
    G: np.ndarray
    det: float
    inertia: tuple[int, int, int]
    kernel: np.ndarray  # columns span the numerical kernel

    @property
    def lorentzian(self) -> bool:
        return self.inertia in LORENTZIAN


def classify_form(G, rank_tol: float = DEFAULT_RANK_TOL) -> QuadraticForm:
    G = np.asarray(G, dtype=float)
    ev, vecs = np.linalg.eigh(G)
    thr = rank_tol * np.abs(ev).max()
    zero = np.abs(ev) <= thr
    n = (int((ev > thr).sum()), int(zero.sum()), int((ev < -thr).sum()))
    return QuadraticForm(G=G, det=float(np.linalg.det(G)), inertia=n, kernel=vecs[:, zero])


@dataclass(frozen=True)
class PointVerdict:
    sigma2: float
    xi: float
    det_G1: float
    det_G2: float
    det_G2_predicted: float
    inertia_G1: tuple[int, int, int]
    inertia_G2: tuple[int, int, int]
    kernel_G1: np.ndarray
    hyperbolic: bool
    notes: tuple[str, ...] = field(default=())


def degeneracy_report(
    jet: JetSample,
    g: MetricSample,
    h: TargetMetricSample,
    xi: float,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> PointVerdict:
    """Classify both quadratic forms at a single point.

    ``det_G2_predicted`` is ``(1 + xi sigma_2)^2 / det(g)``; the square
    follows from the determinant identity with ``f = -xi``.
    """
    sigma2 = float(jet_strain(jet, h, g).sigma2)
    G1, G2 = quadratic_forms(jet, g, h, xi)
    f1 = classify_form(G1, rank_tol)
    f2 = classify_form(G2, rank_tol)
    predicted = float((1 + xi * sigma2) ** 2 / g.det)
    notes = []
    if f1.inertia[1] > 0:
        notes.append(f"G1 singular: {f1.inertia[1]}-dimensional kernel")
    if not f2.lorentzian:
        notes.append(f"G2 not Lorentzian: inertia {f2.inertia}")
    scale = max(abs(predicted), np.abs(G2).max() ** 4)
    if abs(f2.det - predicted) > 1e-10 * scale:
        notes.append("det G2 deviates from (1 + xi sigma2)^2 / det g")
    hyperbolic = f1.lorentzian and f2.lorentzian
    return PointVerdict(
        sigma2=sigma2,
        xi=float(xi),
        det_G1=f1.det,
        det_G2=f2.det,
        det_G2_predicted=predicted,
        inertia_G1=f1.inertia,
        inertia_G2=f2.inertia,
        kernel_G1=f1.kernel,
        hyperbolic=hyperbolic,
        notes=tuple(notes),
    )


def eom_residual(
    jet: JetSample,
    g: MetricSample,
    h: TargetMetricSample,
    model: PowerModel,
) -> np.ndarray:
    """Pointwise residual of ``d_a(sqrt(-g) L2 H^ab) phi^A_b`` on a flat base chart.

    The divergence is expanded by the chain rule through ``sigma_2(x)`` and
    ``H^ab(x)`` using the jet's Hessian and ``h.d_sqrt_det``.  A zero
    residual marks an exact solution at that point.

    Raises:
        MissingHessian: the jet has no second derivatives.
        DomainError: the model is not real at this ``sigma_2``.
    """
    if jet.hess is None:
        raise MissingHessian("eom_residual needs a jet with second derivatives")
    jac, hess = jet.jac, jet.hess
    sym = levi_civita_symbol(2)
    sqrt_h = float(h.sqrt_det)
    d_sqrt_h = np.einsum("C,Ca->a", h.d_sqrt_det, jac)
    wedge = np.einsum("PQ,Pc,Qd->cd", sym, jac, jac)
    d_wedge = np.einsum("PQ,Pac,Qd->acd", sym, hess, jac) + np.einsum("PQ,Pc,Qad->acd", sym, jac, hess)
    dH = d_sqrt_h[:, None, None] * wedge + sqrt_h * d_wedge  # d_a H_cd
    gi = g.g_inv
    H_up = gi @ (sqrt_h * wedge) @ gi
    dH_up = np.einsum("ce,aef,fd->acd", gi, dH, gi)
    sigma2 = float(jet_strain(jet, h, g).sigma2)
    d_sigma2 = np.einsum("cd,acd->a", H_up, dH)
    ev = eval_model(model, sigma2)
    div = ev.L22 * d_sigma2 @ H_up + ev.L2 * np.einsum("aab->b", dH_up)
    return float(g.sqrt_neg_det) * jac @ div
