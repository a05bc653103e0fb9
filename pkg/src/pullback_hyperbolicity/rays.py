"""Bicharacteristic rays of the two quadratic branches.

Each branch ``i`` defines the Hamiltonian ``P_i(x, k) = G_i^ab(x) k_a k_b``
(not square-rooted, so rays are affinely parametrized) and the canonical
equations

    dx^a/dlam = 2 G_i^ab k_b,     dk_a/dlam = -dP_i/dx^a.

Degenerate forms are diagnostics, not failures: a covector in the kernel of
``G1`` has zero transport velocity and the trace says so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .backgrounds import Background, TargetGeometry
from .errors import ChartDomainError, DomainError, FullyDegenerate, NoRealRoot, StepUnderflow
from .geometry import MINKOWSKI, MetricSample
from .models import PowerModel, eval_model

_CBRT_EPS = np.finfo(float).eps ** (1 / 3)

SPAN_END = "span_end"
LEFT_DOMAIN = "left_domain"
DEGENERATE_FORM = "degenerate_form"
STEP_UNDERFLOW = "step_underflow"


class BranchField:
    """The coefficient field ``G_i^ab(x)`` of one branch over a background.

    ``gradient="fd"`` differentiates ``P_i`` in ``x`` by central differences
    with step ``eps**(1/3) * (1 + |x^a|)``; ``gradient="analytic"`` uses the
    background's closed-form Hessian instead.  Constant-jet backgrounds on a
    constant target metric get an exactly vanishing force either way.  The
    base chart is assumed flat (constant ``g``).
    """

    def __init__(
        self,
        background: Background,
        geometry: TargetGeometry,
        model: PowerModel,
        branch: int,
        g: MetricSample = MINKOWSKI,
        gradient: str = "fd",
    ):
        if branch not in (1, 2):
            raise ValueError(f"branch must be 1 or 2, got {branch}")
        if gradient not in ("fd", "analytic"):
            raise ValueError(f"gradient must be 'fd' or 'analytic', got {gradient!r}")
        self.background = background
        self.geometry = geometry
        self.model = model
        self.branch = branch
        self.g = g
        self.gradient = gradient
        self._sqrt_det_h0 = float(np.sqrt(np.linalg.det(geometry.h0)))

    @property
    def constant(self) -> bool:
        return self.background.constant_jet and self.geometry.constant

    def _evaluate(self, x, want_gradient: bool):
        # x may be a stack of points when only G is requested
        phi, jac, hess = self.background.evaluate(x)
        self.geometry.check_domain(phi)
        omega, d_omega = self.geometry.conformal(phi)
        sqrt_h = np.asarray(omega)[..., None, None] * self._sqrt_det_h0
        gi = self.g.g_inv
        j0, j1 = jac[..., 0, :], jac[..., 1, :]
        W = j0[..., :, None] * j1[..., None, :] - j1[..., :, None] * j0[..., None, :]
        H = sqrt_h * W
        Hm = gi @ H
        Hu = Hm @ gi
        HH = Hm @ Hu
        HH = 0.5 * (HH + np.swapaxes(HH, -1, -2))
        sigma2 = 0.5 * np.sum(H * Hu, axis=(-2, -1))
        if self.branch == 1:
            G = sigma2[..., None, None] * gi + HH
        elif sigma2.ndim == 0:
            ev = eval_model(self.model, float(sigma2))
            G = gi - ev.xi * HH
        else:
            xi = np.array([eval_model(self.model, s).xi for s in sigma2.ravel()]).reshape(sigma2.shape)
            G = gi - xi[..., None, None] * HH
        if not want_gradient:
            return G, None
        sqrt_h = float(np.asarray(omega)) * self._sqrt_det_h0
        d_sqrt_h = (d_omega * self._sqrt_det_h0) @ jac
        h0, h1 = hess
        dW = (
            h0[:, :, None] * j1[None, None, :]
            + j0[None, :, None] * h1[:, None, :]
            - h1[:, :, None] * j0[None, None, :]
            - j1[None, :, None] * h0[:, None, :]
        )
        dH = d_sqrt_h[:, None, None] * W + sqrt_h * dW  # [a, c, d] = d_a H_cd
        dHm = gi @ dH
        dHH = dHm @ Hu + Hm @ (dHm @ gi)
        dHH = 0.5 * (dHH + np.swapaxes(dHH, -1, -2))
        d_sigma2 = np.einsum("acd,cd->a", dH, Hu)
        if self.branch == 1:
            dG = d_sigma2[:, None, None] * gi + dHH
        else:
            dG = -ev.dxi * d_sigma2[:, None, None] * HH - ev.xi * dHH
        return G, dG

    def form(self, x) -> np.ndarray:
        return self._evaluate(np.asarray(x, dtype=float), False)[0]

    def form_gradient(self, x) -> np.ndarray:
        """Analytic ``d G^bc / d x^a`` stored as ``[a, b, c]``."""
        return self._evaluate(np.asarray(x, dtype=float), True)[1]

    def hamiltonian(self, x, k) -> float:
        k = np.asarray(k, dtype=float)
        return float(k @ self.form(x) @ k)

    def velocity(self, x, k) -> np.ndarray:
        return 2.0 * self.form(x) @ np.asarray(k, dtype=float)

    def force(self, x, k) -> np.ndarray:
        """``-dP/dx``."""
        if self.constant:
            return np.zeros(4)
        x = np.asarray(x, dtype=float)
        k = np.asarray(k, dtype=float)
        if self.gradient == "analytic":
            return -np.einsum("abc,b,c->a", self.form_gradient(x), k, k)
        steps = _CBRT_EPS * (1 + np.abs(x))
        shifts = np.diag(steps)
        G = self._evaluate(np.concatenate([x + shifts, x - shifts]), False)[0]
        P = np.einsum("nab,a,b->n", G, k, k)
        grad = (P[:4] - P[4:]) / (2 * steps)
        return -grad

    def rhs(self, x, k):
        """Right-hand side ``(dx/dlam, dk/dlam)`` of the canonical equations."""
        if self.gradient == "analytic" and not self.constant:
            G, dG = self._evaluate(np.asarray(x, dtype=float), True)
            return 2.0 * G @ k, -np.einsum("abc,b,c->a", dG, k, k)
        return self.velocity(x, k), self.force(x, k)


class NullRoot(NamedTuple):
    k: np.ndarray
    note: str  # "", "double_root" or "linear_root"


def null_project(field: BranchField, x, k_spatial, root: str = "future", tol: float = 1e-12) -> NullRoot:
    """Complete ``(k1, k2, k3)`` to a null covector of the branch form at ``x``.

    Solves ``G00 k0^2 + 2 G0i ki k0 + Gij ki kj = 0``.  ``root="future"``
    takes the larger root, ``"past"`` the smaller.  If ``G00`` vanishes the
    linear root is used.

    Raises:
        NoRealRoot: negative discriminant, or no ``k0`` dependence and a
            nonzero constant term.
        FullyDegenerate: all three coefficients vanish.
    """
    if root not in ("future", "past"):
        raise ValueError(f"root must be 'future' or 'past', got {root!r}")
    ks = np.asarray(k_spatial, dtype=float)
    G = field.form(x)
    a = G[0, 0]
    b = 2.0 * G[0, 1:] @ ks
    c = ks @ G[1:, 1:] @ ks
    scale = np.abs(G).max() * (1.0 + ks @ ks)
    thr = tol * scale if scale > 0 else tol
    note = ""
    if abs(a) <= thr:
        if abs(b) > thr:
            k0, note = -c / b, "linear_root"
        elif abs(c) <= thr:
            raise FullyDegenerate(f"null-cone quadratic vanishes identically for k_spatial={ks.tolist()}")
        else:
            raise NoRealRoot(f"no k0 solves the branch-{field.branch} null condition")
    else:
        disc = b * b - 4 * a * c
        if disc < -tol * scale * scale:
            raise NoRealRoot(f"direction {ks.tolist()} is not characteristic (discriminant {disc:.3g})")
        if disc <= tol * scale * scale:
            note = "double_root"
        sq = math.sqrt(max(disc, 0.0))
        r1, r2 = (-b + sq) / (2 * a), (-b - sq) / (2 * a)
        k0 = max(r1, r2) if root == "future" else min(r1, r2)
    return NullRoot(np.concatenate([[k0], ks]), note)


@dataclass(frozen=True)
class RayState:
    lam: float
    x: np.ndarray
    k: np.ndarray
    P: float


@dataclass
class RayTrace:
    branch: int
    states: list = field(default_factory=list)
    termination: str = SPAN_END
    notes: list = field(default_factory=list)

    @property
    def drift(self) -> float:
        if not self.states:
            return 0.0
        p0 = self.states[0].P
        return max(abs(s.P - p0) for s in self.states)

    @property
    def lam(self) -> np.ndarray:
        return np.array([s.lam for s in self.states])

    @property
    def x(self) -> np.ndarray:
        return np.array([s.x for s in self.states])

    @property
    def k(self) -> np.ndarray:
        return np.array([s.k for s in self.states])

    @property
    def P(self) -> np.ndarray:
        return np.array([s.P for s in self.states])


def _rk4_step(field: BranchField, x, k, dl):
    rhs = field.rhs
    v1, f1 = rhs(x, k)
    v2, f2 = rhs(x + 0.5 * dl * v1, k + 0.5 * dl * f1)
    v3, f3 = rhs(x + 0.5 * dl * v2, k + 0.5 * dl * f2)
    v4, f4 = rhs(x + dl * v3, k + dl * f3)
    return x + dl / 6 * (v1 + 2 * v2 + 2 * v3 + v4), k + dl / 6 * (f1 + 2 * f2 + 2 * f3 + f4)


def integrate_ray(
    field: BranchField,
    x0,
    k0,
    span: float = 10.0,
    step: float = 1e-3,
    adaptive: bool = False,
    drift_tol: float = 1e-10,
    min_step: float = 1e-9,
    degeneracy_tol: float = 1e-12,
    strict: bool = False,
) -> RayTrace:
    """Integrate the canonical equations with classical RK4.

    The step is fixed unless ``adaptive`` is set; then a step whose
    Hamiltonian change exceeds ``drift_tol * (1 + |P0|)`` is halved and
    retried, and the step grows back toward ``step`` once the change is
    small again.

    Termination reasons: ``span_end``, ``left_domain`` (chart or model
    domain left), ``degenerate_form`` (zero transport velocity at nonzero
    ``k``), ``step_underflow``.  Only ``strict=True`` turns the last one into
    a :class:`StepUnderflow` exception.
    """
    if span <= 0 or step <= 0:
        raise ValueError("span and step must be positive")
    x = np.asarray(x0, dtype=float).copy()
    k = np.asarray(k0, dtype=float).copy()
    trace = RayTrace(branch=field.branch)
    lam = 0.0
    dl = step
    try:
        G = field.form(x)
    except (ChartDomainError, DomainError) as exc:
        trace.termination = LEFT_DOMAIN
        trace.notes.append(str(exc))
        return trace
    p0 = float(k @ G @ k)
    trace.states.append(RayState(lam, x.copy(), k.copy(), p0))
    while lam < span * (1 - 1e-14):
        try:
            G = field.form(x)
            v = 2.0 * G @ k
            kn = np.linalg.norm(k)
            if kn > 0 and np.linalg.norm(v) <= degeneracy_tol * max(np.abs(G).max(), 1e-300) * kn:
                trace.termination = DEGENERATE_FORM
                trace.notes.append(f"zero transport velocity at lambda={lam!r}: k lies in the kernel of G{field.branch}")
                return trace
            p_prev = trace.states[-1].P
            while True:
                dl_eff = min(dl, span - lam)
                xn, kn_ = _rk4_step(field, x, k, dl_eff)
                pn = field.hamiltonian(xn, kn_)
                if not adaptive or abs(pn - p_prev) <= drift_tol * (1 + abs(p0)):
                    break
                dl *= 0.5
                if dl < min_step:
                    trace.termination = STEP_UNDERFLOW
                    trace.notes.append(f"step fell below {min_step!r} at lambda={lam!r}")
                    if strict:
                        raise StepUnderflow(trace.notes[-1])
                    return trace
        except (ChartDomainError, DomainError) as exc:
            trace.termination = LEFT_DOMAIN
            trace.notes.append(str(exc))
            return trace
        x, k = xn, kn_
        lam = lam + dl_eff
        trace.states.append(RayState(lam, x.copy(), k.copy(), pn))
        if adaptive and dl < step and abs(pn - p_prev) <= drift_tol * (1 + abs(p0)) / 32:
            dl = min(2 * dl, step)
    return trace
