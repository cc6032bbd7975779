"""Atomistic, QCL, QCE, QNL and ghost-force-corrected energies with exact variations.

Every model is a weighted sum of pair terms ``w * phi(c . y')`` over element
strains ``y'``.  :func:`bond_inventory` enumerates those terms once per model
and everything else (energy, first and second variation) is assembled from
it.  Variations are stored in strain coordinates:

* ``E'(y)[u] = eps * sum_ell g_ell u'_ell``  (``FirstVariation.coefficients``)
* ``E''(y)[u, v] = eps * u'^T M v'``          (``HessianForm.strain_matrix``)
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .chain import ChainParams, Deformation, backward_difference
from .errors import InadmissibleStrain
from .potentials import Potential

ADMISSIBILITY_GUARD = 1e-8

_TAGS = ("atomistic", "qcl", "qce", "qnl", "gfc")


@dataclass(frozen=True)
class ModelKind:
    """Which energy functional to use; ``gfc`` carries its linearisation strain."""

    tag: str
    linearization_strain: float | None = None

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise ValueError(f"unknown model {self.tag!r}; expected one of {_TAGS}")
        if (self.tag == "gfc") != (self.linearization_strain is not None):
            raise ValueError("a linearization strain is required for gfc and only for gfc")

    def __str__(self):
        if self.tag == "gfc":
            return f"gfc(F={self.linearization_strain:g})"
        return self.tag


ATOMISTIC = ModelKind("atomistic")
QCL = ModelKind("qcl")
QCE = ModelKind("qce")
QNL = ModelKind("qnl")


def GFC(strain: float) -> ModelKind:
    return ModelKind("gfc", float(strain))


class Bond(NamedTuple):
    """One pair term.

    ``kind`` is ``"nn"`` (``phi(y'_l)``), ``"nnn"`` (``phi(y'_l + y'_{l+1})``)
    or ``"cb"`` (``phi(2 y'_l)``); ``element`` is the first element label ``l``.
    """

    kind: str
    element: int
    weight: float


def _atom_terms(ell, atomistic):
    """Pair terms of the per-atom energy of atom ``ell``, each with factor 1/2."""
    if atomistic:
        return [("nn", ell), ("nn", ell + 1), ("nnn", ell - 1), ("nnn", ell + 1)]
    return [("nn", ell), ("nn", ell + 1), ("cb", ell), ("cb", ell + 1)]


def bond_inventory(model: ModelKind, params: ChainParams) -> list[Bond]:
    """Enumerate every pair term of ``model`` with its weight (``eps`` included).

    Element labels are wrapped into ``-N+1 .. N``.  The ghost-force
    correction is linear, so ``gfc`` shares the QCE inventory.
    """
    N, K, eps = params.n_half, params.k_interface, params.eps
    sites = range(-N + 1, N + 1)
    acc: dict[tuple[str, int], float] = {}

    def wrap(ell):
        return (ell + N - 1) % (2 * N) - N + 1

    def add(kind, ell, w):
        key = (kind, wrap(ell))
        acc[key] = acc.get(key, 0.0) + w

    if model.tag == "qnl":
        for ell in sites:
            add("nn", ell, eps)
            if -K - 1 <= ell <= K + 1:
                add("nnn", ell, eps)
            else:
                add("cb", ell, 0.5 * eps)
                add("cb", ell + 1, 0.5 * eps)
    else:
        for ell in sites:
            if model.tag == "atomistic":
                atomistic = True
            elif model.tag == "qcl":
                atomistic = False
            else:
                atomistic = -K <= ell <= K
            for kind, e in _atom_terms(ell, atomistic):
                add(kind, e, 0.5 * eps)

    order = {"nn": 0, "nnn": 1, "cb": 2}
    keys = sorted(acc, key=lambda kv: (order[kv[0]], kv[1]))
    return [Bond(kind, ell, acc[(kind, ell)]) for kind, ell in keys]


@dataclass(frozen=True)
class _Compiled:
    first: np.ndarray
    second: np.ndarray
    c_first: np.ndarray
    c_second: np.ndarray
    weight: np.ndarray
    bonds: tuple


@lru_cache(maxsize=64)
def _compile(tag: str, n_half: int, k_interface: int) -> _Compiled:
    params = ChainParams(n_half, k_interface)
    model = ModelKind(tag, 1.0 if tag == "gfc" else None)
    bonds = bond_inventory(model, params)
    first, second, c1, c2, w = [], [], [], [], []
    for b in bonds:
        i = int(params.index(b.element))
        if b.kind == "nn":
            first.append(i), second.append(i), c1.append(1.0), c2.append(0.0)
        elif b.kind == "nnn":
            first.append(i), second.append(int(params.index(b.element + 1)))
            c1.append(1.0), c2.append(1.0)
        else:
            first.append(i), second.append(i), c1.append(2.0), c2.append(0.0)
        w.append(b.weight)
    arrs = [np.asarray(a) for a in (first, second, c1, c2, w)]
    for a in arrs:
        a.setflags(write=False)
    return _Compiled(*arrs, bonds=tuple(bonds))


def _resolve(y, params):
    if isinstance(y, Deformation):
        return y.strains(), y.params
    if params is None:
        raise TypeError("params are required when passing a raw strain array")
    s = np.asarray(y, dtype=float)
    if s.shape != (params.size,):
        raise ValueError(f"expected {params.size} element strains, got shape {s.shape}")
    return s, params


def _bond_lengths(comp: _Compiled, s: np.ndarray, params: ChainParams) -> np.ndarray:
    r = comp.c_first * s[comp.first] + comp.c_second * s[comp.second]
    bad = np.flatnonzero(~(r > ADMISSIBILITY_GUARD))
    if bad.size:
        b = comp.bonds[bad[0]]
        raise InadmissibleStrain(
            f"inadmissible {b.kind} bond at element {b.element}: length {r[bad[0]]:.3e}",
            bond=b,
            value=float(r[bad[0]]),
        )
    return r


@dataclass(frozen=True)
class FirstVariation:
    """Strain-dual representation of ``E'(y)``; defined up to an additive constant."""

    coefficients: np.ndarray
    params: ChainParams

    def __call__(self, u) -> float:
        e = backward_difference(u, self.params)
        return float(self.params.eps * np.dot(self.coefficients, e))

    def zero_mean(self) -> np.ndarray:
        """Canonical representative: the coefficients with their mean removed."""
        return self.coefficients - self.coefficients.mean()

    def site_forces(self) -> np.ndarray:
        """Partial derivatives ``dE/dy_ell = g_ell - g_{ell+1}``."""
        g = self.coefficients
        return g - np.roll(g, -1)

    def dual_norm(self) -> float:
        """Norm of ``E'`` against test strains normalised in weighted l1.

        ``sup { eps sum g e : sum e = 0, eps sum |e| = 1 } = (max g - min g) / 2``.
        """
        g = self.coefficients
        return 0.5 * float(g.max() - g.min())


@dataclass(frozen=True)
class HessianForm:
    """Symmetric bilinear form ``E''(y)`` in strain coordinates."""

    strain_matrix: np.ndarray
    model: ModelKind
    strains: np.ndarray
    params: ChainParams

    def bilinear(self, u, v) -> float:
        a = backward_difference(u, self.params)
        b = backward_difference(v, self.params)
        return float(self.params.eps * a @ self.strain_matrix @ b)

    def quadratic(self, u) -> float:
        return self.bilinear(u, u)

    def site_matrix(self) -> np.ndarray:
        """Hessian with respect to the site positions ``y_ell``."""
        p = self.params
        n = p.size
        D = (np.eye(n) - np.roll(np.eye(n), 1, axis=0)) / p.eps
        return p.eps * D.T @ self.strain_matrix @ D


def energy(model: ModelKind, y, p: Potential, params: ChainParams | None = None) -> float:
    """Energy per period of ``y`` (a :class:`Deformation` or element strains)."""
    s, params = _resolve(y, params)
    comp = _compile(model.tag, params.n_half, params.k_interface)
    r = _bond_lengths(comp, s, params)
    E = float(np.dot(comp.weight, p.derivative(r, 0)))
    if model.tag == "gfc":
        g0 = _qce_coefficients(model.linearization_strain, p, params)
        E -= params.eps * float(np.dot(g0, s - model.linearization_strain))
    return E


def _raw_gradient(tag, s, p, params):
    comp = _compile(tag, params.n_half, params.k_interface)
    r = _bond_lengths(comp, s, params)
    t = comp.weight * p.derivative(r, 1)
    G = np.zeros(params.size)
    np.add.at(G, comp.first, t * comp.c_first)
    np.add.at(G, comp.second, t * comp.c_second)
    return G / params.eps


def _qce_coefficients(F, p, params):
    return _raw_gradient("qce", np.full(params.size, float(F)), p, params)


def first_variation(
    model: ModelKind, y, p: Potential, params: ChainParams | None = None
) -> FirstVariation:
    s, params = _resolve(y, params)
    g = _raw_gradient(model.tag, s, p, params)
    if model.tag == "gfc":
        g = g - _qce_coefficients(model.linearization_strain, p, params)
    return FirstVariation(g, params)


def second_variation(
    model: ModelKind, y, p: Potential, params: ChainParams | None = None
) -> HessianForm:
    s, params = _resolve(y, params)
    comp = _compile(model.tag, params.n_half, params.k_interface)
    r = _bond_lengths(comp, s, params)
    t = comp.weight * p.derivative(r, 2)
    M = np.zeros((params.size, params.size))
    i, j, a, b = comp.first, comp.second, comp.c_first, comp.c_second
    np.add.at(M, (i, i), t * a * a)
    np.add.at(M, (j, j), t * b * b)
    np.add.at(M, (i, j), t * a * b)
    np.add.at(M, (j, i), t * a * b)
    M /= params.eps
    return HessianForm(M, model, s, params)
