"""Coercivity eigenvalues and closed-form stability constants.

The coercivity constant of a Hessian is

    inf { E''(y)[u, u] : u zero-mean, ||u'||_{l2_eps} = 1 },

i.e. the smallest eigenvalue of the strain matrix restricted to the
sum-zero subspace.  Note the normalisation is by the strain ``u'``, not by
``u`` itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .chain import ChainParams, Deformation, Displacement, strain_to_displacement
from .energies import QCE, HessianForm, ModelKind, second_variation
from .errors import BracketError, EigenSolverError, HypothesisError, NonConvexBond
from .potentials import Potential, moduli


@lru_cache(maxsize=32)
def sum_zero_basis(size: int) -> np.ndarray:
    """Orthonormal ``size x (size-1)`` basis of vectors with zero sum."""
    # Householder reflector mapping e_0 onto ones/sqrt(n); its other columns span the complement.
    n = size
    v = np.full(n, 1.0 / math.sqrt(n))
    v[0] -= 1.0
    v /= np.linalg.norm(v)
    Hh = np.eye(n) - 2.0 * np.outer(v, v)
    Q = np.ascontiguousarray(Hh[:, 1:])
    Q.setflags(write=False)
    return Q


def projected_eigh(M: np.ndarray):
    """Eigen-decomposition of ``M`` restricted to the sum-zero subspace.

    Returns ascending eigenvalues and the eigenvectors expressed back in full
    strain coordinates (columns sum to zero, unit Euclidean norm).
    """
    Q = sum_zero_basis(M.shape[0])
    A = Q.T @ M @ Q
    A = 0.5 * (A + A.T)
    try:
        w, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"symmetric eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise EigenSolverError("eigensolver returned non-finite eigenvalues")
    return w, Q @ V


@dataclass(frozen=True)
class StabilityReport:
    lambda_min: float
    model: ModelKind
    params: ChainParams
    strain_mode: np.ndarray = field(repr=False)
    analytic_prediction: float | None = None

    @property
    def stable(self) -> bool:
        return self.lambda_min > 0

    def minimizing_displacement(self) -> Displacement:
        """Zero-mean displacement whose strain is the minimizing mode, ``||u'||_2 = 1``."""
        p = self.params
        e = self.strain_mode / math.sqrt(p.eps * np.dot(self.strain_mode, self.strain_mode))
        return Displacement(strain_to_displacement(e - e.mean(), p), p)


def coercivity_eigenvalue(H: HessianForm, analytic_prediction: float | None = None) -> StabilityReport:
    if not np.array_equal(H.strain_matrix, H.strain_matrix.T):
        raise ValueError("Hessian strain matrix is not symmetric")
    w, V = projected_eigh(H.strain_matrix)
    return StabilityReport(float(w[0]), H.model, H.params, V[:, 0], analytic_prediction)


def stability_at(model: ModelKind, y, p: Potential, params: ChainParams | None = None) -> StabilityReport:
    """Shorthand for ``coercivity_eigenvalue(second_variation(...))``."""
    return coercivity_eigenvalue(second_variation(model, y, p, params))


@dataclass(frozen=True)
class SpectralConstants:
    mu_eps: float
    eps: float


def mu_eps(params) -> SpectralConstants:
    """Smallest ratio ``||psi''|| / ||psi'||`` on the periodic chain: ``2 sin(pi eps/2) / eps``.

    ``params`` may be a :class:`ChainParams` or the integer ``N``.
    """
    n = params.n_half if isinstance(params, ChainParams) else int(params)
    if n < 2:
        raise ValueError("mu_eps needs N >= 2")
    eps = 1.0 / n
    return SpectralConstants(2.0 * math.sin(math.pi * eps / 2.0) / eps, eps)


def atomistic_stability_constant(p: Potential, F: float, params) -> float:
    """``A_F - eps^2 mu_eps^2 phi''(2F)``; valid when ``phi''(2F) <= 0``."""
    m = moduli(p, F)
    if m.phi2F_2 > 0:
        raise HypothesisError(
            f"atomistic stability constant requires phi''(2F) <= 0; got {m.phi2F_2:.3e} at F={F}"
        )
    sc = mu_eps(params)
    return m.a_F - sc.eps**2 * sc.mu_eps**2 * m.phi2F_2


def cauchy_born_modulus(p: Potential, F: float) -> float:
    """``A_F``: the exact coercivity constant of QCL, and of QNL when ``phi''(2F) <= 0``."""
    return moduli(p, F).a_F


@dataclass(frozen=True)
class QceBoundReport:
    """Asymptotic upper bound for the QCE coercivity constant at its equilibrium.

    ``terms`` holds the three candidates (already multiplied by ``phi''(F)``):
    ``"plus"`` for the weak bond next to the atomistic side of the interface,
    ``"minus"`` for the weak bond on the continuum side, and ``"bulk"`` = ``A_F``.
    """

    min_of_three: float
    branch: str
    terms: dict
    lambda_K: float | None = None


def qce_asymptotic_bound(p: Potential, F: float) -> QceBoundReport:
    m = moduli(p, F)
    if not m.phiF_2 > 0:
        raise NonConvexBond(f"phi''(F) = {m.phiF_2:.3e} <= 0 at F={F}")
    ratio = m.phi2F_2 / m.phiF_2
    shift = m.phiF_3 * m.phi2F_1 / (2.0 * m.phiF_2**2) - 1.5 * ratio
    terms = {
        "plus": m.phiF_2 * (1.0 + 3.0 * ratio + shift),
        "minus": m.phiF_2 * (1.0 + 3.0 * ratio - shift),
        "bulk": m.a_F,
    }
    branch = min(terms, key=terms.get)
    return QceBoundReport(terms[branch], branch, terms)


def interface_test_function(params: ChainParams, variant: str = "at_K") -> Displacement:
    """Unit-strain-norm displacement concentrated on a mirror pair of interface elements.

    ``at_K`` puts strain ``+c`` on element ``K`` and ``-c`` on ``-K+1``;
    ``at_K_plus_2`` uses elements ``K+2`` and ``-K-1``; ``c = (1/(2 eps))**0.5``.
    """
    K = params.k_interface
    if variant == "at_K":
        pos, neg = K, -K + 1
    elif variant == "at_K_plus_2":
        pos, neg = K + 2, -K - 1
    else:
        raise ValueError(f"unknown test-function variant {variant!r}")
    c = math.sqrt(0.5 / params.eps)
    e = np.zeros(params.size)
    e[params.index(pos)] = c
    e[params.index(neg)] = -c
    return Displacement(strain_to_displacement(e, params), params)


def qce_uniform_eigenvalue(p: Potential, F: float, params: ChainParams) -> float:
    """Coercivity constant of ``E''_qce(y_F)`` (equivalently of the GFC energy at ``y_F``)."""
    return stability_at(QCE, Deformation.uniform(params, F), p).lambda_min


def qce_uniform_critical_strain(p: Potential, params: ChainParams, lo: float, hi: float,
                                xtol: float = 1e-13) -> float:
    """Strain in ``[lo, hi]`` where ``E''_qce(y_F)`` stops being positive definite."""
    f = lambda F: qce_uniform_eigenvalue(p, F, params)  # noqa: E731
    flo, fhi = f(lo), f(hi)
    if not (flo > 0 > fhi):
        raise BracketError(
            f"E''_qce(y_F) eigenvalue does not change sign on [{lo}, {hi}]: {flo:.3e}, {fhi:.3e}"
        )
    return brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)


def qce_yF_lambdaK(p: Potential, params: ChainParams, bracket: tuple[float, float] | None = None) -> float:
    """``lambda_K`` with ``A_F + lambda_K phi''(2F) = 0`` at the uniform-state QCE critical strain."""
    if bracket is None:
        from .critical import solve_F0, solve_Fc_star

        bracket = (solve_F0(p).value, solve_Fc_star(p).value)
    F = qce_uniform_critical_strain(p, params, *bracket)
    m = moduli(p, F)
    if not m.phi2F_2 < 0:
        raise HypothesisError(f"lambda_K undefined: phi''(2F) = {m.phi2F_2:.3e} at F={F}")
    return -m.a_F / m.phi2F_2
