"""Reserve-process models and their Laplace exponents.

A model describes a spectrally negative Lévy process through its premium rate,
Brownian volatility and compound-Poisson claims, or a strictly stable process
with ``psi(theta) = theta**alpha``.  Models flagged with the dual orientation
describe a spectrally positive reserve ``X``; their parameters are those of
``-X`` and every scale quantity is computed for ``-X``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import ClassVar, Union

import numpy as np
from scipy import optimize, special

from ._special import expint_scaled
from .errors import DomainError, NumericalError


class ModelKind(str, enum.Enum):
    CRAMER_LUNDBERG = "cramer-lundberg"
    CRAMER_LUNDBERG_DIFFUSION = "cramer-lundberg-diffusion"
    STABLE = "stable"


class Orientation(str, enum.Enum):
    SPECTRALLY_NEGATIVE = "spectrally-negative"
    DUAL = "dual"


class Variation(str, enum.Enum):
    BOUNDED = "bounded"
    UNBOUNDED = "unbounded"


def _rising(a: float, n: int) -> float:
    out = 1.0
    for i in range(n):
        out *= a + i
    return out


@dataclass(frozen=True)
class Exponential:
    """Exponential claims with the given rate."""

    rate: float
    kind: ClassVar[str] = "exponential"

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise DomainError(f"exponential rate must be positive, got {self.rate}")

    @property
    def mean(self) -> float:
        return 1.0 / self.rate

    @property
    def completely_monotone(self) -> bool:
        return True

    def pdf(self, y):
        y = np.asarray(y, dtype=float)
        return np.where(y >= 0, self.rate * np.exp(-self.rate * np.maximum(y, 0.0)), 0.0)

    def laplace(self, theta):
        return self.rate / (self.rate + theta)

    def laplace_derivative(self, theta):
        return -self.rate / (self.rate + theta) ** 2

    def expansion(self, order: int):
        mu = self.rate
        return [mu * (-mu) ** (k - 1) for k in range(1, order + 1)]

    def remainder(self, beta, order: int):
        mu = self.rate
        return mu * (-mu) ** order / (mu + beta)

    def ppf(self, u):
        return -np.log1p(-u) / self.rate


@dataclass(frozen=True)
class Lomax:
    """Pareto type II claims with density ``a/s * (1 + y/s)**(-a-1)``."""

    scale: float
    shape: float
    kind: ClassVar[str] = "lomax"

    def __post_init__(self):
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise DomainError(f"lomax scale must be positive, got {self.scale}")
        if not (self.shape > 1 and math.isfinite(self.shape)):
            raise DomainError(f"lomax shape must exceed 1 for a finite mean, got {self.shape}")

    @property
    def mean(self) -> float:
        return self.scale / (self.shape - 1.0)

    @property
    def completely_monotone(self) -> bool:
        return True

    def pdf(self, y):
        y = np.asarray(y, dtype=float)
        a, s = self.shape, self.scale
        return np.where(y >= 0, a / s * (1.0 + np.maximum(y, 0.0) / s) ** (-a - 1.0), 0.0)

    def _ell(self, shape, w):
        # Laplace transform of a unit-scale Lomax(shape) at w.
        return shape * expint_scaled(shape + 1.0, w)

    def laplace(self, theta):
        out = self._ell(self.shape, self.scale * np.asarray(theta, dtype=complex))
        return out.real if np.isrealobj(theta) else out

    def laplace_derivative(self, theta):
        a, s = self.shape, self.scale
        w = s * np.asarray(theta, dtype=complex)
        out = a * s * (expint_scaled(a + 1.0, w) - expint_scaled(a, w))
        return out.real if np.isrealobj(theta) else out

    def expansion(self, order: int):
        a, s = self.shape, self.scale
        return [(-1) ** (k - 1) * _rising(a, k) * s ** (-k) for k in range(1, order + 1)]

    def remainder(self, beta, order: int):
        a, s = self.shape, self.scale
        coef = (-1) ** order * _rising(a, order) * s ** (-order)
        return coef * self._ell(a + order, s * np.asarray(beta, dtype=complex))

    def ppf(self, u):
        return self.scale * np.expm1(-np.log1p(-u) / self.shape)


@dataclass(frozen=True)
class Gamma:
    """Gamma claims with density proportional to ``y**(k-1) exp(-y/s)``."""

    shape: float
    scale: float
    kind: ClassVar[str] = "gamma"

    def __post_init__(self):
        if not (self.shape > 0 and math.isfinite(self.shape)):
            raise DomainError(f"gamma shape must be positive, got {self.shape}")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise DomainError(f"gamma scale must be positive, got {self.scale}")

    @property
    def mean(self) -> float:
        return self.shape * self.scale

    @property
    def completely_monotone(self) -> bool:
        return self.shape <= 1.0

    @property
    def integer_shape(self) -> int | None:
        k = round(self.shape)
        return int(k) if abs(self.shape - k) < 1e-12 and k >= 1 else None

    def pdf(self, y):
        y = np.asarray(y, dtype=float)
        k, s = self.shape, self.scale
        yp = np.maximum(y, 0.0)
        with np.errstate(divide="ignore"):
            logp = (k - 1.0) * np.log(yp) - yp / s - special.gammaln(k) - k * math.log(s)
        return np.where(y > 0, np.exp(logp), 0.0)

    def laplace(self, theta):
        return (1.0 + self.scale * theta) ** (-self.shape)

    def laplace_derivative(self, theta):
        k, s = self.shape, self.scale
        return -k * s * (1.0 + s * theta) ** (-k - 1.0)

    def expansion(self, order: int):
        k, s = self.shape, self.scale
        n = self.integer_shape
        out = []
        for i in range(1, order + 1):
            if i < k:
                out.append(0.0)
            elif n is None:
                return None
            else:
                j = i - n
                out.append((-1) ** j * math.comb(n + j - 1, j) * s ** (-i))
        return out

    def remainder(self, beta, order: int):
        k, s = self.shape, self.scale
        beta = np.asarray(beta, dtype=complex)
        if order < k:
            return beta ** order * self.laplace(beta)
        n = self.integer_shape
        if n is None:
            return None
        j_max = order - n
        # 1 - (1 + y)^n * P(y) with P the truncated binomial series of (1 + y)^(-n)
        partial = [(-1) ** j * math.comb(n + j - 1, j) for j in range(j_max + 1)]
        binom = [math.comb(n, i) for i in range(n + 1)]
        prod = [0] * (n + j_max + 1)
        for i, bi in enumerate(binom):
            for j, pj in enumerate(partial):
                prod[i + j] += bi * pj
        numer = [-c for c in prod]
        numer[0] += 1
        tail = numer[j_max + 1:]
        y = 1.0 / (s * beta)
        poly = np.zeros_like(y)
        for coef in reversed(tail):
            poly = poly * y + coef
        return s ** (-order) * y * poly / (1.0 + y) ** n

    def ppf(self, u):
        return self.scale * special.gammaincinv(self.shape, u)


ClaimDistribution = Union[Exponential, Lomax, Gamma]


@dataclass(frozen=True)
class ProcessModel:
    """Lévy reserve model.

    For the jump kinds the Lévy measure is ``lam`` times the reflected claim
    density; the Brownian part has volatility ``sigma``.  The stable kind has
    no further parameters besides ``alpha``.
    """

    kind: ModelKind
    c: float = 0.0
    lam: float = 0.0
    claims: ClaimDistribution | None = None
    sigma: float = 0.0
    alpha: float | None = None
    orientation: Orientation = Orientation.SPECTRALLY_NEGATIVE

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        object.__setattr__(self, "orientation", Orientation(self.orientation))
        for name in ("c", "lam", "sigma"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.kind is ModelKind.STABLE:
            if self.alpha is None or not (1.0 < self.alpha < 2.0):
                raise DomainError(f"stable index must lie in (1, 2), got {self.alpha}")
            if self.sigma != 0.0 or self.lam != 0.0 or self.c != 0.0 or self.claims is not None:
                raise DomainError("stable models take no drift, volatility or claims")
            return
        if self.alpha is not None:
            raise DomainError("alpha is only meaningful for stable models")
        if self.lam < 0:
            raise DomainError(f"jump intensity must be nonnegative, got {self.lam}")
        if self.lam > 0 and self.claims is None:
            raise DomainError("a positive jump intensity needs a claim distribution")
        if self.sigma < 0:
            raise DomainError(f"volatility must be nonnegative, got {self.sigma}")
        if self.kind is ModelKind.CRAMER_LUNDBERG:
            if self.sigma != 0.0:
                raise DomainError("use the diffusion kind for sigma > 0")
            if self.c <= 0:
                raise DomainError("bounded-variation models need a positive premium rate")
        elif self.sigma <= 0:
            raise DomainError("the diffusion kind needs sigma > 0")

    @classmethod
    def cramer_lundberg(cls, c, lam, claims, orientation=Orientation.SPECTRALLY_NEGATIVE):
        return cls(ModelKind.CRAMER_LUNDBERG, c=c, lam=lam, claims=claims, orientation=orientation)

    @classmethod
    def cramer_lundberg_diffusion(cls, c, lam, claims, sigma, orientation=Orientation.SPECTRALLY_NEGATIVE):
        return cls(
            ModelKind.CRAMER_LUNDBERG_DIFFUSION,
            c=c,
            lam=lam,
            claims=claims,
            sigma=sigma,
            orientation=orientation,
        )

    @classmethod
    def stable(cls, alpha, orientation=Orientation.SPECTRALLY_NEGATIVE):
        return cls(ModelKind.STABLE, alpha=alpha, orientation=orientation)

    @property
    def is_stable(self) -> bool:
        return self.kind is ModelKind.STABLE

    @property
    def has_jumps(self) -> bool:
        return self.lam > 0

    @property
    def completely_monotone(self) -> bool:
        """Whether the Lévy measure has a completely monotone density."""
        if self.is_stable or not self.has_jumps:
            return True
        return self.claims.completely_monotone


def psi_complex(model: ProcessModel, theta):
    """Laplace exponent without domain checks; accepts complex arrays."""
    if model.is_stable:
        return np.asarray(theta) ** model.alpha
    out = model.c * theta + 0.5 * model.sigma**2 * theta**2
    if model.has_jumps:
        out = out - model.lam * (1.0 - model.claims.laplace(theta))
    return out


def laplace_exponent(model: ProcessModel, theta: float) -> float:
    """Return ``psi(theta)`` for ``theta >= 0``."""
    theta = float(theta)
    if not theta >= 0:
        raise DomainError(f"theta must be nonnegative, got {theta}")
    value = float(np.real(psi_complex(model, theta)))
    if not math.isfinite(value):
        raise NumericalError(f"psi({theta}) is not finite")
    return value


def laplace_exponent_derivative(model: ProcessModel, theta: float) -> float:
    """Return ``psi'(theta)``; at zero this is the right derivative."""
    theta = float(theta)
    if not theta >= 0:
        raise DomainError(f"theta must be nonnegative, got {theta}")
    if model.is_stable:
        return model.alpha * theta ** (model.alpha - 1.0)
    value = model.c + model.sigma**2 * theta
    if model.has_jumps:
        value += model.lam * float(np.real(model.claims.laplace_derivative(theta)))
    if not math.isfinite(value):
        raise NumericalError(f"psi'({theta}) is not finite")
    return value


def right_inverse_phi(model: ProcessModel, q: float) -> float:
    """Largest root of ``psi(theta) = q``."""
    q = float(q)
    if not q > 0:
        raise DomainError(f"q must be positive, got {q}")
    if model.is_stable:
        return q ** (1.0 / model.alpha)
    hi = 1.0
    for _ in range(200):
        if laplace_exponent(model, hi) > q:
            break
        hi *= 2.0
    else:
        raise NumericalError("could not bracket the root of psi - q")
    # psi is convex with psi(0) = 0 < q, so [0, hi] holds exactly one crossing.
    root = optimize.brentq(lambda t: laplace_exponent(model, t) - q, 0.0, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
    # one Newton step tightens the relative residual
    slope = laplace_exponent_derivative(model, root)
    if slope > 0:
        step = (laplace_exponent(model, root) - q) / slope
        if abs(step) < 1e-8 * max(root, 1e-300):
            root -= step
    return root


def variation_kind(model: ProcessModel) -> Variation:
    if model.kind is ModelKind.CRAMER_LUNDBERG:
        return Variation.BOUNDED
    return Variation.UNBOUNDED
