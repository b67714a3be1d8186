"""Registry of parametric primitive families with analytic derivatives.

Every callable accepts numpy arrays (or floats) and broadcasts.  Families are
looked up by name from the run configuration; parameters are keyword
arguments of the dataclass.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import ndtr

from .errors import UnknownFamily


# --- cognitive cost c(m1, t) -------------------------------------------------


@dataclass(frozen=True)
class PowerCost:
    """c = m1**a / (b * t**p).

    ``p > 0`` makes the cost fall with type; ``p < 0`` is kept only so that
    deliberately invalid primitives can be expressed.
    """

    a: float = 2.0
    b: float = 2.0
    p: float = 1.0

    name = "power"

    def __call__(self, m1, t):
        return np.power(m1, self.a) / (self.b * np.power(t, self.p))

    def d_m1(self, m1, t):
        return self.a * np.power(m1, self.a - 1.0) / (self.b * np.power(t, self.p))

    def d_t(self, m1, t):
        return -self.p * np.power(m1, self.a) / (self.b * np.power(t, self.p + 1.0))


# --- output f(m1, t) -----------------------------------------------------------


@dataclass(frozen=True)
class AffineOutput:
    """f = scale * t + gamma * m1."""

    gamma: float = 0.0
    scale: float = 1.0

    name = "affine"

    def __call__(self, m1, t):
        return self.scale * np.asarray(t, dtype=float) + self.gamma * np.asarray(m1, dtype=float)

    def d_m1(self, m1, t):
        return np.full(np.broadcast(m1, t).shape, self.gamma)

    def d_t(self, m1, t):
        return np.full(np.broadcast(m1, t).shape, self.scale)


@dataclass(frozen=True)
class MultiplicativeOutput:
    """f = t * (1 + gamma * m1)."""

    gamma: float = 0.5

    name = "multiplicative"

    def __call__(self, m1, t):
        return np.asarray(t, dtype=float) * (1.0 + self.gamma * np.asarray(m1, dtype=float))

    def d_m1(self, m1, t):
        return self.gamma * np.asarray(t, dtype=float) + 0.0 * np.asarray(m1, dtype=float)

    def d_t(self, m1, t):
        return 1.0 + self.gamma * np.asarray(m1, dtype=float) + 0.0 * np.asarray(t, dtype=float)


# --- non-cognitive cost h(m2) --------------------------------------------------


@dataclass(frozen=True)
class QuadraticNoncog:
    """h = m2**2 / (2 k)."""

    k: float = 1.0

    name = "quadratic"

    def __call__(self, m2):
        m2 = np.asarray(m2, dtype=float)
        return m2 * m2 / (2.0 * self.k)

    def d_m2(self, m2):
        return np.asarray(m2, dtype=float) / self.k


@dataclass(frozen=True)
class ExponentialNoncog:
    """h = scale * (exp(m2) - 1 - m2)."""

    scale: float = 1.0

    name = "exponential"

    def __call__(self, m2):
        m2 = np.asarray(m2, dtype=float)
        return self.scale * np.expm1(m2) - self.scale * m2

    def d_m2(self, m2):
        return self.scale * np.expm1(np.asarray(m2, dtype=float))


# --- type distributions -----------------------------------------------------------


@dataclass(frozen=True)
class Uniform:
    name = "uniform"

    def pdf(self, t, t_lo, t_hi):
        t = np.asarray(t, dtype=float)
        return np.where((t >= t_lo) & (t <= t_hi), 1.0 / (t_hi - t_lo), 0.0)

    def cdf(self, t, t_lo, t_hi):
        return np.clip((np.asarray(t, dtype=float) - t_lo) / (t_hi - t_lo), 0.0, 1.0)


@dataclass(frozen=True)
class TruncatedNormal:
    mean: float = 2.0
    sd: float = 1.0

    name = "truncated_normal"

    def _mass(self, t_lo, t_hi):
        return ndtr((t_hi - self.mean) / self.sd) - ndtr((t_lo - self.mean) / self.sd)

    def pdf(self, t, t_lo, t_hi):
        t = np.asarray(t, dtype=float)
        z = (t - self.mean) / self.sd
        dens = np.exp(-0.5 * z * z) / (self.sd * np.sqrt(2.0 * np.pi) * self._mass(t_lo, t_hi))
        return np.where((t >= t_lo) & (t <= t_hi), dens, 0.0)

    def cdf(self, t, t_lo, t_hi):
        t = np.clip(np.asarray(t, dtype=float), t_lo, t_hi)
        low = ndtr((t_lo - self.mean) / self.sd)
        return (ndtr((t - self.mean) / self.sd) - low) / self._mass(t_lo, t_hi)


@dataclass(frozen=True)
class TruncatedExponential:
    """Density proportional to exp(-rate * (t - t_lo)); negative rates tilt upward."""

    rate: float = 1.0

    name = "truncated_exponential"

    def _norm(self, t_lo, t_hi):
        return -np.expm1(-self.rate * (t_hi - t_lo)) / self.rate

    def pdf(self, t, t_lo, t_hi):
        t = np.asarray(t, dtype=float)
        dens = np.exp(-self.rate * (t - t_lo)) / self._norm(t_lo, t_hi)
        return np.where((t >= t_lo) & (t <= t_hi), dens, 0.0)

    def cdf(self, t, t_lo, t_hi):
        t = np.clip(np.asarray(t, dtype=float), t_lo, t_hi)
        return -np.expm1(-self.rate * (t - t_lo)) / self.rate / self._norm(t_lo, t_hi)


COST_FAMILIES = {"power": PowerCost}
OUTPUT_FAMILIES = {"affine": AffineOutput, "multiplicative": MultiplicativeOutput}
NONCOG_FAMILIES = {"quadratic": QuadraticNoncog, "exponential": ExponentialNoncog}
DISTRIBUTION_FAMILIES = {
    "uniform": Uniform,
    "truncated_normal": TruncatedNormal,
    "truncated_exponential": TruncatedExponential,
}

REGISTRIES = {
    "cost": COST_FAMILIES,
    "output": OUTPUT_FAMILIES,
    "noncog": NONCOG_FAMILIES,
    "distribution": DISTRIBUTION_FAMILIES,
}


def make_family(kind, name, **params):
    try:
        cls = REGISTRIES[kind][name]
    except KeyError:
        known = ", ".join(sorted(REGISTRIES.get(kind, {})))
        raise UnknownFamily(f"unknown {kind} family {name!r} (known: {known})", field=kind) from None
    try:
        return cls(**{k: float(v) for k, v in params.items()})
    except TypeError as exc:
        raise UnknownFamily(f"bad parameters for {kind} family {name!r}: {exc}", field=kind) from None


def family_params(family):
    return {k: float(v) for k, v in asdict(family).items()}
