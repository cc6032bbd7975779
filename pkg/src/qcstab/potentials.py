"""Pair potentials with closed-form derivatives up to fourth order.

Potentials are written in unscaled strain variables: ``phi(r)`` with ``r``
the bond length per reference spacing.  The energies module applies the
``eps`` weights.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonConvexBond

MAX_ORDER = 4


class Potential(ABC):
    """Pair interaction ``phi`` on ``(0, inf)``."""

    #: short descriptor used in CSV output, e.g. ``morse:alpha=2``
    name: str = "potential"

    @abstractmethod
    def _derivative(self, r: np.ndarray, k: int) -> np.ndarray: ...

    @property
    @abstractmethod
    def inflection(self) -> float:
        """Bond length ``r_*`` separating the convex and concave regions."""

    def derivative(self, r, k: int = 0):
        """k-th derivative of ``phi`` at ``r`` (scalar or array)."""
        if k not in range(MAX_ORDER + 1):
            raise ValueError(f"derivative order must be 0..{MAX_ORDER}, got {k}")
        arr = np.asarray(r, dtype=float)
        if np.any(~(arr > 0)):
            raise DomainError(f"pair potential evaluated at non-positive r={arr.min()!r}")
        out = self._derivative(arr, k)
        return float(out) if np.ndim(out) == 0 else out

    def __call__(self, r):
        return self.derivative(r, 0)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class MorsePotential(Potential):
    """``phi(r) = exp(-2 a (r-1)) - 2 exp(-a (r-1))``, well minimum at ``r = 1``."""

    def __init__(self, alpha: float):
        if not alpha >= 1:
            raise ValueError(f"Morse stiffness alpha must be >= 1, got {alpha}")
        self.alpha = float(alpha)
        self.name = f"morse:alpha={self.alpha:g}"

    def _derivative(self, r, k):
        a = self.alpha
        x = np.exp(-a * (r - 1.0))
        # d^k/dr^k of x^2 is (-2a)^k x^2, of x is (-a)^k x
        return (-2.0 * a) ** k * x * x - 2.0 * (-a) ** k * x

    @property
    def inflection(self) -> float:
        return 1.0 + math.log(2.0) / self.alpha

    def __eq__(self, other):
        return isinstance(other, MorsePotential) and other.alpha == self.alpha

    def __hash__(self):
        return hash(("morse", self.alpha))


class LennardJonesPotential(Potential):
    """``phi(r) = r**-12 - 2 r**-6``, well minimum at ``r = 1``."""

    name = "lj"

    @staticmethod
    def _falling(p, k):
        out = 1.0
        for i in range(k):
            out *= p - i
        return out

    def _derivative(self, r, k):
        return self._falling(-12, k) * r ** (-12 - k) - 2.0 * self._falling(-6, k) * r ** (-6 - k)

    @property
    def inflection(self) -> float:
        # phi'' = 156 r**-14 - 84 r**-8 vanishes at r**6 = 13/7
        return (13.0 / 7.0) ** (1.0 / 6.0)

    def __eq__(self, other):
        return isinstance(other, LennardJonesPotential)

    def __hash__(self):
        return hash("lj")


def parse_potential(spec: str) -> Potential:
    """Build a potential from a descriptor such as ``morse:alpha=3.5`` or ``lj``."""
    text = spec.strip().lower()
    kind, _, rest = text.partition(":")
    opts = {}
    if rest:
        for item in rest.split(","):
            key, sep, val = item.partition("=")
            if not sep:
                raise ValueError(f"malformed potential option {item!r} in {spec!r}")
            opts[key.strip()] = float(val)
    if kind == "morse":
        if set(opts) != {"alpha"}:
            raise ValueError(f"morse needs exactly one option alpha=..., got {spec!r}")
        return MorsePotential(opts["alpha"])
    if kind in ("lj", "lennard-jones", "lennard_jones"):
        if opts:
            raise ValueError(f"lj takes no options, got {spec!r}")
        return LennardJonesPotential()
    raise ValueError(f"unknown potential {spec!r}")


def cauchy_born(p: Potential, r, k: int = 0):
    """k-th derivative of the Cauchy-Born density ``phi(r) + phi(2r)``."""
    if k not in (0, 1, 2):
        raise ValueError(f"Cauchy-Born derivative order must be 0..2, got {k}")
    r = np.asarray(r, dtype=float)
    out = p.derivative(r, k) + 2.0**k * p.derivative(2.0 * r, k)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Moduli:
    """Derivatives of ``phi`` at ``F`` and ``2F`` that enter the stability criteria."""

    phiF_2: float
    phi2F_2: float
    a_F: float
    phiF_3: float
    phi2F_1: float
    phi2F_3: float


def moduli(p: Potential, F: float) -> Moduli:
    d2F, d22F = p.derivative(F, 2), p.derivative(2 * F, 2)
    return Moduli(
        phiF_2=d2F,
        phi2F_2=d22F,
        a_F=d2F + 4.0 * d22F,
        phiF_3=p.derivative(F, 3),
        phi2F_1=p.derivative(2 * F, 1),
        phi2F_3=p.derivative(2 * F, 3),
    )


@dataclass(frozen=True)
class DeltaParams:
    """Relative strength of next-nearest to nearest-neighbour interactions."""

    delta1: float
    delta2: float
    delta3: float

    @property
    def delta(self) -> float:
        return max(abs(self.delta1), abs(self.delta2), abs(self.delta3))


def deltas(p: Potential, F: float) -> DeltaParams:
    h = p.derivative(F, 2)
    if not h > 0:
        raise NonConvexBond(f"nearest-neighbour bond not convex at F={F}: phi''(F)={h}")
    return DeltaParams(
        delta1=p.derivative(2 * F, 1) / h,
        delta2=-p.derivative(2 * F, 2) / h,
        delta3=p.derivative(2 * F, 3) / h,
    )
