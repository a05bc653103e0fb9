"""Power-law Lagrangians ``L(sigma_2) = c * sigma_2**q`` and their derivatives."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModel, DomainError


@dataclass(frozen=True)
class PowerModel:
    c: float
    q: float
    name: str = "power"

    def __post_init__(self):
        if not self.q > 0:
            raise ValueError(f"exponent q must be positive, got {self.q}")
        if self.c == 0:
            raise ValueError("coefficient c must be nonzero")

    @property
    def integer_exponent(self) -> bool:
        return float(self.q).is_integer()

    def __call__(self, sigma2):
        return self.c * np.power(sigma2, self.q)


# the power family is the only Lagrangian family implemented
LagrangianModel = PowerModel

AFZ = PowerModel(c=-0.5, q=0.75, name="afz")
STRONGLY_COUPLED = PowerModel(c=-0.5, q=1.0, name="strongly_coupled")

PRESETS = {m.name: m for m in (AFZ, STRONGLY_COUPLED)}


@dataclass(frozen=True)
class ModelEval:
    L: float
    L2: float
    L22: float
    xi: float
    dxi: float = 0.0  # d xi / d sigma2


def eval_model(model: PowerModel, sigma2: float) -> ModelEval:
    """Evaluate ``L``, its first two ``sigma_2`` derivatives and ``xi = 2 L22 / L2``.

    For a pure power ``xi = 2 (q - 1) / sigma_2`` independently of ``c``.

    Raises:
        DomainError: ``sigma2 <= 0`` with a fractional exponent (no real
            branch), or ``sigma2 < 0`` raised to a negative power.
        DegenerateModel: ``L2 == 0``, e.g. ``q > 1`` at ``sigma2 == 0``.
    """
    s = float(sigma2)
    c, q = model.c, float(model.q)
    if not np.isfinite(s):
        raise DomainError(f"sigma2 is not finite: {s}")
    if not model.integer_exponent and s <= 0:
        raise DomainError(f"sigma2 = {s!r} is outside the real domain of sigma2**{q}")
    L = c * s**q
    L2 = c * q * s ** (q - 1)
    # q == 1 must not touch s**-1 at s == 0
    L22 = 0.0 if q == 1 else c * q * (q - 1) * s ** (q - 2)
    if L2 == 0:
        raise DegenerateModel(f"dL/dsigma2 vanishes at sigma2 = {s!r} (q = {q})")
    xi = 2 * L22 / L2 + 0.0  # + 0.0 drops the signed zero at q == 1
    # xi = 2 (q - 1) / sigma2 for a pure power
    dxi = 0.0 if q == 1 else -xi / s
    return ModelEval(L=L, L2=L2, L22=L22, xi=xi, dxi=dxi)
