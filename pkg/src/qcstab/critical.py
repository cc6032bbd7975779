"""Critical strains of the atomistic chain and its QC approximations.

Scalar criteria (``F0``, ``Fc*``, ``Fa*``, the asymptotic QCE prediction) are
bracketed by a sign scan and polished with Brent's method.  The QCE critical
strain has no closed form: it is found by natural-parameter continuation of
the QCE equilibrium branch from ``F0`` until the branch loses stability.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from .chain import ChainParams
from .energies import QCE, second_variation
from .errors import BracketError, ContinuationStalled, HypothesisError, NewtonError, QCError
from .potentials import MorsePotential, Potential
from .qce import approx_equilibrium, newton_solve
from .stability import mu_eps, projected_eigh, qce_uniform_critical_strain

logger = logging.getLogger(__name__)

ROOT_XTOL = 1e-14
SCAN_POINTS = 400
FRACTURE_FACTOR = 10.0
CONTINUATION_STEPS = 50
CONTINUATION_FLOOR = 1e-10
LOCALIZATION_TOL = 1e-8

KINDS = ("F0", "Fa_star", "Fc_star", "Ftilde_qce", "Fqce_star", "Fqce_at_yF")


@dataclass(frozen=True)
class CriticalStrainResult:
    value: float
    kind: str
    potential_id: str
    params: ChainParams | None = None
    solver_meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown critical strain kind {self.kind!r}")

    def __float__(self):
        return self.value


def _first_root(fn, lo, hi, what, n=SCAN_POINTS):
    """First sign change of ``fn`` on a log-spaced grid over ``[lo, hi]``, refined by Brent."""
    grid = np.geomspace(lo, hi, n)
    vals = np.array([fn(x) for x in grid])
    if vals[0] == 0.0:
        return float(grid[0]), {"bracket": (float(grid[0]), float(grid[0])), "iterations": 0}
    change = np.flatnonzero(np.sign(vals[1:]) != np.sign(vals[:-1]))
    if change.size == 0:
        raise BracketError(f"{what}: no sign change on [{lo:.6g}, {hi:.6g}]")
    a, b = float(grid[change[0]]), float(grid[change[0] + 1])
    root, info = brentq(fn, a, b, xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps,
                        maxiter=200, full_output=True)
    return float(root), {"bracket": (a, b), "iterations": info.iterations,
                         "residual": float(fn(root))}


def F0_equation(p: Potential, F: float) -> float:
    """``d/dF E_a(y_F) = phi'(F) + 2 phi'(2F)``."""
    return p.derivative(F, 1) + 2.0 * p.derivative(2 * F, 1)


def psi_c(p: Potential, F: float) -> float:
    return p.derivative(F, 2) + 4.0 * p.derivative(2 * F, 2)


def psi_a(p: Potential, F: float, params) -> float:
    sc = mu_eps(params)
    return p.derivative(F, 2) + (4.0 - (sc.eps * sc.mu_eps) ** 2) * p.derivative(2 * F, 2)


def psi_qce_tilde(p: Potential, F: float) -> float:
    d2 = p.derivative(F, 2)
    return d2 + 1.5 * p.derivative(2 * F, 2) + p.derivative(F, 3) * p.derivative(2 * F, 1) / (2.0 * d2)


def solve_F0(p: Potential) -> CriticalStrainResult:
    """Energy-minimising uniform strain: root of ``phi'(F) + 2 phi'(2F)``."""
    # the pair well sits at r = 1 for the supported potentials; F0 lies just below it
    F, meta = _first_root(lambda F: F0_equation(p, F), 0.5, 1.5, "F0")
    return CriticalStrainResult(F, "F0", p.name, None, meta)


def solve_Fc_star(p: Potential, F0: float | None = None) -> CriticalStrainResult:
    """QCL/QNL critical strain: root of ``A_F = phi''(F) + 4 phi''(2F)``."""
    F0 = solve_F0(p).value if F0 is None else F0
    F, meta = _first_root(lambda F: psi_c(p, F), F0, 3 * F0, "Fc_star")
    return CriticalStrainResult(F, "Fc_star", p.name, None, meta)


def solve_Fa_star(p: Potential, params: ChainParams, F0: float | None = None) -> CriticalStrainResult:
    """Atomistic critical strain: root of ``phi''(F) + (4 - eps^2 mu_eps^2) phi''(2F)``."""
    F0 = solve_F0(p).value if F0 is None else F0
    F, meta = _first_root(lambda F: psi_a(p, F, params), F0, 3 * F0, "Fa_star")
    return CriticalStrainResult(F, "Fa_star", p.name, params, meta)


def solve_Ftilde_qce(p: Potential, F0: float | None = None) -> CriticalStrainResult:
    """Asymptotic QCE critical strain from the weak-interface-bond criterion."""
    F0 = solve_F0(p).value if F0 is None else F0
    # the criterion divides by phi''(F), so stay below the inflection point
    hi = min(3 * F0, p.inflection * (1 - 1e-9))
    F, meta = _first_root(lambda F: psi_qce_tilde(p, F), F0, hi, "Ftilde_qce")
    return CriticalStrainResult(F, "Ftilde_qce", p.name, None, meta)


def solve_Fqce_at_yF(p: Potential, params: ChainParams, F0: float | None = None,
                     Fc: float | None = None) -> CriticalStrainResult:
    """Strain at which ``E''_qce(y_F)`` (= the GFC Hessian at ``y_F``) loses positivity."""
    F0 = solve_F0(p).value if F0 is None else F0
    Fc = solve_Fc_star(p, F0).value if Fc is None else Fc
    F = qce_uniform_critical_strain(p, params, F0, Fc)
    return CriticalStrainResult(F, "Fqce_at_yF", p.name, params, {"bracket": (F0, Fc)})


def _probe(p, F, params, guess):
    """Newton-solve at ``F`` and classify the result; returns ``(branch, lambda_min, mode)``."""
    br = newton_solve(p, F, params, guess)
    s = br.strains
    if np.max(s) > FRACTURE_FACTOR * F:
        return br, -np.inf, None
    w, V = projected_eigh(second_variation(QCE, s, p, params).strain_matrix)
    return br, float(w[0]), V[:, 0]


def interface_mass(mode: np.ndarray, params: ChainParams) -> float:
    """Fraction of the squared strain mode carried by elements ``+-(K-1) .. +-(K+2)``."""
    K = params.k_interface
    ell = np.r_[np.arange(K - 1, K + 3), np.arange(-K - 1, -K + 3)]
    idx = np.unique(params.index(ell))
    return float(np.sum(mode[idx] ** 2) / np.sum(mode**2))


def solve_Fqce_star(p: Potential, params: ChainParams, F0: float | None = None,
                    Fc: float | None = None, tol: float = LOCALIZATION_TOL) -> CriticalStrainResult:
    """Largest strain with a stable elastic QCE equilibrium, by continuation from ``F0``.

    Each step re-solves with the previous equilibrium as the initial guess.  A
    probe fails if Newton fails, the Hessian is not positive definite, or some
    element strain exceeds ``FRACTURE_FACTOR * F``.  Failures halve the step;
    the search ends once the step drops below ``tol``.
    """
    F0 = solve_F0(p).value if F0 is None else F0
    Fc = solve_Fc_star(p, F0).value if Fc is None else Fc
    tol = max(tol, CONTINUATION_FLOOR)
    dF = (Fc - F0) / CONTINUATION_STEPS
    br, lam, mode = _probe(p, F0, params, approx_equilibrium(p, F0, params))
    if not lam > 0:
        raise HypothesisError(f"QCE equilibrium at F0={F0} is already unstable (lambda={lam:.3e})")
    good_F, good_s, good_lam, good_mode = F0, br.strains, lam, mode
    accepted = rejected = 0
    while dF >= tol:
        F = good_F + dF
        try:
            br, lam, mode = _probe(p, F, params, good_s)
            ok = lam > 0
        except NewtonError:
            ok = False
        if ok:
            good_F, good_s, good_lam, good_mode = F, br.strains, lam, mode
            accepted += 1
        else:
            rejected += 1
            dF *= 0.5
    if rejected == 0:
        raise ContinuationStalled("continuation never detected an instability", good_F, dF)
    if good_F == F0:
        raise ContinuationStalled(f"no stable step beyond F0={F0}", good_F, dF)
    meta = {
        "bracket": (good_F, good_F + 2 * dF),
        "accepted_steps": accepted,
        "rejected_steps": rejected,
        "lambda_min_last": good_lam,
        "interface_mass": interface_mass(good_mode, params),
        "strains": good_s,
    }
    return CriticalStrainResult(good_F, "Fqce_star", p.name, params, meta)


@dataclass(frozen=True)
class ErrConstant:
    value: float
    potential_id: str


def c_err(p: Potential, F0: float | None = None, Fc: float | None = None) -> ErrConstant:
    """Leading relative-error constant between the atomistic and QCL critical strains.

    ``|Fa* - Fc*| / |F0 - Fc*| = eps^2 C_err + O(eps^4)`` with
    ``C_err = |pi^2 phi''(2Fc) / ((phi'''(Fc) + 8 phi'''(2Fc)) (F0 - Fc))|``.
    """
    F0 = solve_F0(p).value if F0 is None else F0
    Fc = solve_Fc_star(p, F0).value if Fc is None else Fc
    denom = (p.derivative(Fc, 3) + 8.0 * p.derivative(2 * Fc, 3)) * (F0 - Fc)
    if denom == 0.0 or not math.isfinite(denom):
        raise QCError(f"C_err denominator vanishes for {p.name}")
    return ErrConstant(abs(math.pi**2 * p.derivative(2 * Fc, 2) / denom), p.name)


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    F0: float
    Fc_star: float
    Fa_star: float
    Ftilde_qce: float
    Fqce_star: float
    Fqce_at_yF: float
    relerr_qce: float
    relerr_tilde: float
    error: str = ""


SWEEP_COLUMNS = ("alpha", "F0", "Fc_star", "Fa_star", "Ftilde_qce", "Fqce_star",
                 "Fqce_at_yF", "relerr_qce", "relerr_tilde")


def sweep_row(alpha: float, params: ChainParams) -> SweepRow:
    p = MorsePotential(alpha)
    F0 = solve_F0(p).value
    Fc = solve_Fc_star(p, F0).value
    Fa = solve_Fa_star(p, params, F0).value
    Ft = solve_Ftilde_qce(p, F0).value
    Fq = solve_Fqce_star(p, params, F0, Fc).value
    Fy = solve_Fqce_at_yF(p, params, F0, Fc).value
    span = abs(Fc - F0)
    return SweepRow(alpha, F0, Fc, Fa, Ft, Fq, Fy, abs(Fq - Fc) / span, abs(Ft - Fc) / span)


def _safe_row(alpha: float, params: ChainParams) -> SweepRow:
    try:
        return sweep_row(alpha, params)
    except QCError as exc:
        logger.warning("sweep: alpha=%g failed: %s", alpha, exc)
        nan = float("nan")
        return SweepRow(alpha, *([nan] * 8), error=f"{type(exc).__name__}: {exc}")


def sweep_alpha(alphas, params: ChainParams, jobs: int = 1) -> list[SweepRow]:
    """One row of critical strains per Morse stiffness; failing rows are flagged, not fatal.

    With ``jobs > 1`` rows are computed in worker processes; the result is in
    the order of ``alphas`` either way.
    """
    alphas = [float(a) for a in alphas]
    if jobs <= 1 or len(alphas) < 2:
        return [_safe_row(a, params) for a in alphas]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_safe_row, alphas, [params] * len(alphas)))


def format_float(x: float) -> str:
    return "nan" if x != x else f"{x:.17g}"


def rows_to_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        d = asdict(r) if hasattr(r, "__dataclass_fields__") else dict(r)
        w.writerow([format_float(d[c]) if isinstance(d[c], float) else d[c] for c in columns])
    return buf.getvalue()
