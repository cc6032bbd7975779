"""Periodic chain geometry: index convention, difference operators and norms.

Sites are labelled ``ell = -N+1, ..., N`` and stored at array position
``ell + N - 1``.  Element (bond) ``ell`` joins atoms ``ell - 1`` and ``ell``,
so the strain vector shares the site indexing.  All periodic access goes
through :meth:`ChainParams.index`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

ZERO_MEAN_RTOL = 1e-12


@dataclass(frozen=True)
class ChainParams:
    """Size of the periodic chain, the atomistic half-width and the macroscopic strain.

    Parameters
    ----------
    n_half : int
        Half the number of atoms per period (``N``); the spacing is ``1/N``.
    k_interface : int
        Atomistic region is ``{-K, ..., K}``.
    strain : float
        Macroscopic deformation gradient ``F``.
    """

    n_half: int
    k_interface: int
    strain: float = 1.0

    def __post_init__(self):
        n, k = self.n_half, self.k_interface
        if int(n) != n or int(k) != k:
            raise ValueError("n_half and k_interface must be integers")
        if n < 8:
            raise ValueError(f"n_half must be >= 8, got {n}")
        if not 2 <= k <= n - 4:
            raise ValueError(
                f"k_interface must satisfy 2 <= K <= N-4 (N={n}), got K={k}"
            )
        if not self.strain > 0:
            raise ValueError(f"strain must be positive, got {self.strain}")

    @property
    def eps(self) -> float:
        return 1.0 / self.n_half

    @property
    def size(self) -> int:
        return 2 * self.n_half

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.n_half + 1, self.n_half + 1)

    def index(self, ell):
        """Array position of site/element ``ell`` with periodic wrap."""
        return (np.asarray(ell) + self.n_half - 1) % self.size

    def with_strain(self, strain: float) -> "ChainParams":
        return replace(self, strain=float(strain))


def _eps_for(values, params=None):
    if params is not None:
        return params.eps
    n = len(values)
    if n % 2:
        raise ValueError("periodic arrays must have even length 2N")
    return 2.0 / n


def _values(x):
    return np.asarray(getattr(x, "values", x), dtype=float)


@dataclass(frozen=True)
class Displacement:
    """A 2N-periodic displacement; the mean is removed on construction."""

    values: np.ndarray
    params: ChainParams

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.params.size,):
            raise ValueError(f"expected {self.params.size} values, got {v.shape}")
        v = v - v.mean()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def at(self, ell):
        return self.values[self.params.index(ell)]


@dataclass(frozen=True)
class StrainVector:
    """Backward-difference image of a displacement; entries sum to zero."""

    values: np.ndarray
    params: ChainParams

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.params.size,):
            raise ValueError(f"expected {self.params.size} values, got {v.shape}")
        check_sum_zero(v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def at(self, ell):
        return self.values[self.params.index(ell)]


@dataclass(frozen=True)
class Deformation:
    """``y = y_F + u``: uniform strain plus a zero-mean periodic perturbation."""

    strain: float
    perturbation: Displacement
    params: ChainParams = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "params", self.perturbation.params)

    @classmethod
    def uniform(cls, params: ChainParams, strain: float | None = None) -> "Deformation":
        F = params.strain if strain is None else strain
        return cls(F, Displacement(np.zeros(params.size), params.with_strain(F)))

    @classmethod
    def from_strains(cls, params: ChainParams, strains) -> "Deformation":
        """Rebuild a deformation from its element strains ``y'``; ``F`` is their mean."""
        s = np.asarray(strains, dtype=float)
        F = float(s.mean())
        u = strain_to_displacement(s - F, params)
        return cls(F, Displacement(u, params.with_strain(F)))

    def strains(self) -> np.ndarray:
        """Element strains ``y'_ell = F + u'_ell``."""
        return self.strain + backward_difference(self.perturbation.values, self.params)

    def positions(self) -> np.ndarray:
        p = self.params
        return self.strain * p.sites * p.eps + self.perturbation.values


def check_sum_zero(values, rtol=ZERO_MEAN_RTOL):
    """Strict validator: raise if ``values`` does not sum to zero."""
    v = np.asarray(values, dtype=float)
    scale = np.max(np.abs(v), initial=0.0)
    if abs(v.sum()) > rtol * max(scale, 1.0) * len(v):
        raise ValueError(f"entries must sum to zero (sum={v.sum():.3e})")


def backward_difference(u, params: ChainParams | None = None) -> np.ndarray:
    """``u'_ell = (u_ell - u_{ell-1}) / eps`` with periodic wrap."""
    v = _values(u)
    return (v - np.roll(v, 1)) / _eps_for(v, params)


def second_difference(u, params: ChainParams | None = None) -> np.ndarray:
    """``u''_ell = (u_{ell+1} - 2 u_ell + u_{ell-1}) / eps**2`` with periodic wrap."""
    v = _values(u)
    eps = _eps_for(v, params)
    return (np.roll(v, -1) - 2.0 * v + np.roll(v, 1)) / eps**2


def strain_gradient(e, params: ChainParams | None = None) -> np.ndarray:
    """``(e_{ell+1} - e_ell) / eps``; equals ``u''`` when ``e = u'``."""
    v = _values(e)
    return (np.roll(v, -1) - v) / _eps_for(v, params)


def lp_norm(v, p=2, params: ChainParams | None = None) -> float:
    """Weighted norm ``(sum eps |v|^p)^(1/p)``, or the max norm for ``p=inf``."""
    x = _values(v)
    if p in (np.inf, "inf", float("inf")):
        return float(np.max(np.abs(x), initial=0.0))
    if p not in (1, 2):
        raise ValueError(f"p must be 1, 2 or inf, got {p!r}")
    eps = _eps_for(x, params)
    return float((eps * np.sum(np.abs(x) ** p)) ** (1.0 / p))


def inner_product(u, v, params: ChainParams | None = None) -> float:
    """Weighted inner product ``eps * sum u_ell v_ell``."""
    a, b = _values(u), _values(v)
    if a.shape != b.shape:
        raise ValueError("inner_product needs arrays of equal length")
    return float(_eps_for(a, params) * np.dot(a, b))


def strain_to_displacement(e, params: ChainParams | None = None) -> np.ndarray:
    """Inverse of :func:`backward_difference` on zero-mean displacements.

    Raises ``ValueError`` if the strains do not sum to zero.
    """
    v = _values(e)
    check_sum_zero(v)
    eps = _eps_for(v, params)
    u = eps * np.cumsum(v)
    return u - u.mean()
