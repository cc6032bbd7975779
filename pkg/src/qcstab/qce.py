"""Ghost forces and equilibria of the energy-based QC approximation.

The uniform state ``y_F`` is not a critical point of the QCE energy: its
first variation is the ghost-force functional ``-phi'(2F) <g', u'>`` with
``g'`` supported on the four interface elements.  Correcting ``y_F`` by
``delta_1 * g`` gives an explicit approximate equilibrium; Newton's method on
the sum-zero strain subspace then gives the exact one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .chain import ChainParams, Deformation, check_sum_zero
from .energies import QCE, FirstVariation, ModelKind, first_variation, second_variation
from .errors import (
    InadmissibleIterate,
    InadmissibleStrain,
    MaxIterations,
    NewtonError,
    SingularHessian,
)
from .potentials import MorsePotential, Potential, deltas
from .stability import projected_eigh

logger = logging.getLogger(__name__)

NEWTON_TOL = 1e-12
SINGULAR_TOL = 1e-14


@dataclass(frozen=True)
class GhostProfile:
    """Strain profile ``g'``: -1/2 at elements -K-1 and K+2, +1/2 at -K+1 and K."""

    g_hat_strain: np.ndarray
    params: ChainParams


def ghost_profile(params: ChainParams) -> GhostProfile:
    K = params.k_interface
    g = np.zeros(params.size)
    g[params.index([-K - 1, K + 2])] = -0.5
    g[params.index([-K + 1, K])] = 0.5
    check_sum_zero(g)
    g.setflags(write=False)
    return GhostProfile(g, params)


def ghost_force(p: Potential, F: float, params: ChainParams) -> FirstVariation:
    """``E'_qce(y_F)`` in closed form: coefficients ``-phi'(2F) * g'``."""
    g = ghost_profile(params).g_hat_strain
    return FirstVariation(-p.derivative(2 * F, 1) * g, params)


def approx_equilibrium(p: Potential, F: float, params: ChainParams) -> Deformation:
    """First-order corrected state ``y_F + delta_1 g``."""
    d1 = deltas(p, F).delta1
    s = F + d1 * ghost_profile(params).g_hat_strain
    return Deformation.from_strains(params.with_strain(F), s)


@dataclass(frozen=True)
class EquilibriumBranch:
    solution: Deformation
    residual_norm: float
    newton_iterations: int
    converged: bool
    residual_history: tuple = field(default=(), repr=False)

    @property
    def strains(self) -> np.ndarray:
        return self.solution.strains()


def newton_solve(
    p: Potential,
    F: float,
    params: ChainParams,
    y0: Deformation | np.ndarray | None = None,
    model: ModelKind = QCE,
    tol: float = NEWTON_TOL,
    max_iter: int = 50,
    max_halvings: int = 10,
) -> EquilibriumBranch:
    """Solve ``E'(y)[u] = 0`` for all zero-mean ``u`` at macroscopic strain ``F``.

    ``y0`` may be a deformation or an array of element strains; only its
    fluctuation about its own mean is used, so a neighbouring branch point can
    be passed directly.  Defaults to :func:`approx_equilibrium`.
    Convergence is measured in the dual norm of :meth:`FirstVariation.dual_norm`.
    """
    params = params.with_strain(F)
    if y0 is None:
        y0 = approx_equilibrium(p, F, params)
    s0 = y0.strains() if isinstance(y0, Deformation) else np.asarray(y0, dtype=float)
    s = F + (s0 - s0.mean())
    history = []

    def residual(strains):
        try:
            g = first_variation(model, strains, p, params)
        except InadmissibleStrain:
            return None, np.inf
        return g, g.dual_norm()

    g, res = residual(s)
    if g is None:
        raise InadmissibleIterate("initial guess has inadmissible strains", iterate=s)
    for it in range(max_iter + 1):
        history.append(res)
        if res <= tol:
            return EquilibriumBranch(
                Deformation.from_strains(params, s), res, it, True, tuple(history)
            )
        if it == max_iter:
            break
        H = second_variation(model, s, p, params)
        w, V = projected_eigh(H.strain_matrix)
        if np.min(np.abs(w)) < SINGULAR_TOL * max(1.0, np.max(np.abs(w))):
            raise SingularHessian(f"singular Hessian at F={F} (|lambda|min={np.min(np.abs(w)):.2e})", iterate=s)
        # V spans the sum-zero subspace, so V^T g is the reduced right-hand side
        step = -V @ ((V.T @ g.coefficients) / w)
        t = 1.0
        for _ in range(max_halvings + 1):
            g_new, res_new = residual(s + t * step)
            if g_new is not None:
                break
            t *= 0.5
        else:
            raise InadmissibleIterate(f"Newton iterate left the admissible set at F={F}", iterate=s)
        s = s + t * step
        g, res = g_new, res_new
        logger.debug("newton F=%.12g it=%d res=%.3e step=%.3e", F, it + 1, res, t * np.max(np.abs(step)))
    raise MaxIterations(f"Newton did not converge in {max_iter} iterations at F={F} (res={res:.3e})", iterate=s)


def is_mirror_symmetric(strains: np.ndarray, params: ChainParams, atol: float = 1e-10) -> bool:
    """Whether ``y'_ell == y'_{1-ell}`` for all elements."""
    ell = params.sites
    return bool(np.allclose(strains[params.index(ell)], strains[params.index(1 - ell)], rtol=0, atol=atol))


@dataclass(frozen=True)
class LemmaRow:
    alpha: float
    strain: float
    delta1: float
    delta2: float
    error: float
    ok: bool = True
    note: str = ""

    @property
    def predictor(self) -> float:
        return self.delta1**2 + self.delta1 * self.delta2


@dataclass(frozen=True)
class LemmaScalingResult:
    rows: list
    slope: float
    intercept: float


def lemma_scaling_study(alphas, params: ChainParams, strain: float | None = None) -> LemmaScalingResult:
    """Distance between the Newton equilibrium and ``y_F + delta_1 g`` across Morse stiffnesses.

    Each row records ``||(y_qce - y_hat)'||_inf`` together with ``delta_1, delta_2``;
    ``strain=None`` uses the energy-minimising strain of each potential.  The
    least-squares slope of ``log(error)`` against ``log(delta_1^2 + delta_1 delta_2)``
    is returned alongside.
    """
    from .critical import solve_F0

    rows = []
    for a in alphas:
        pot = MorsePotential(a)
        F = solve_F0(pot).value if strain is None else strain
        d = deltas(pot, F)
        try:
            y_hat = approx_equilibrium(pot, F, params)
            br = newton_solve(pot, F, params, y_hat)
            err = float(np.max(np.abs(br.strains - y_hat.strains())))
            rows.append(LemmaRow(a, F, d.delta1, d.delta2, err))
        except NewtonError as exc:
            logger.warning("lemma scaling: alpha=%g failed: %s", a, exc)
            rows.append(LemmaRow(a, F, d.delta1, d.delta2, float("nan"), False, str(exc)))
    good = [r for r in rows if r.ok and r.error > 0 and r.predictor > 0]
    if len(good) >= 2:
        x = np.log([r.predictor for r in good])
        y = np.log([r.error for r in good])
        slope, intercept = np.polyfit(x, y, 1)
    else:
        slope = intercept = float("nan")
    return LemmaScalingResult(rows, float(slope), float(intercept))
