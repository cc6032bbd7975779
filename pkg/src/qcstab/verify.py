"""Self-checks run by ``qcstab verify``.

Each group returns a list of :class:`Check` records.  Random deformations
come from a seeded generator so a report is reproducible from its seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import ChainParams, Deformation, backward_difference, lp_norm, second_difference
from .critical import solve_F0, solve_Fa_star, solve_Fc_star
from .energies import ATOMISTIC, GFC, QCE, QCL, QNL, energy, first_variation, second_variation
from .potentials import MorsePotential, moduli
from .qce import ghost_force
from .stability import (
    atomistic_stability_constant,
    interface_test_function,
    mu_eps,
    qce_yF_lambdaK,
    stability_at,
)

GROUPS = ("fd", "prop31", "prop32", "prop33", "ghost", "lambdaK", "mu")

FD_STEP = 1e-5
GRAD_RTOL = 1e-6
HESS_RTOL = 1e-5
SPECTRAL_RTOL = 1e-9


@dataclass(frozen=True)
class Check:
    group: str
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} [{self.group}] {self.name}: {self.detail}"


def random_deformation(rng: np.random.Generator, params: ChainParams, F: float,
                       amplitude: float = 0.05) -> Deformation:
    """Uniform strain ``F`` plus a random zero-mean strain fluctuation of size ``amplitude * F``."""
    e = rng.uniform(-1.0, 1.0, params.size)
    e = amplitude * F * (e - e.mean())
    return Deformation.from_strains(params.with_strain(F), F + e)


def _site_energy(model, params, p, positions, F):
    # positions are y_ell - F x_ell; rebuild strains directly to keep this path independent
    s = F + backward_difference(positions, params)
    return energy(model, s, p, params)


def fd_gradient(model, y: Deformation, p, h=FD_STEP) -> np.ndarray:
    """Central differences of the energy with respect to each site position."""
    params, F = y.params, y.strain
    u = y.perturbation.values.copy()
    g = np.empty(params.size)
    for i in range(params.size):
        u[i] += h
        ep = _site_energy(model, params, p, u, F)
        u[i] -= 2 * h
        em = _site_energy(model, params, p, u, F)
        u[i] += h
        g[i] = (ep - em) / (2 * h)
    return g


def fd_hessian(model, y: Deformation, p, h=FD_STEP) -> np.ndarray:
    """Central differences of the analytic site forces."""
    params, F = y.params, y.strain
    base = y.strains()
    n = params.size
    Hs = np.empty((n, n))
    for i in range(n):
        # moving site i by h changes strain i by +h/eps and strain i+1 by -h/eps
        d = np.zeros(n)
        d[i] += h / params.eps
        d[(i + 1) % n] -= h / params.eps
        gp = first_variation(model, base + d, p, params).site_forces()
        gm = first_variation(model, base - d, p, params).site_forces()
        Hs[:, i] = (gp - gm) / (2 * h)
    return Hs


def _rel(a, b):
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def check_fd(seed: int = 0, samples: int = 20, n_half: int = 8, k_interface: int = 2,
             alpha: float = 5.0) -> list[Check]:
    rng = np.random.default_rng(seed)
    p = MorsePotential(alpha)
    params = ChainParams(n_half, k_interface)
    F0 = solve_F0(p).value
    out = []
    for model in (ATOMISTIC, QCL, QCE, QNL, GFC(F0)):
        worst_g = worst_h = 0.0
        for _ in range(samples):
            F = rng.uniform(0.95, 1.05) * F0
            y = random_deformation(rng, params, F)
            g = first_variation(model, y, p).site_forces()
            worst_g = max(worst_g, _rel(fd_gradient(model, y, p), g))
            H = second_variation(model, y, p).site_matrix()
            worst_h = max(worst_h, _rel(fd_hessian(model, y, p), H))
        out.append(Check("fd", f"{model} gradient", worst_g <= GRAD_RTOL, f"max rel err {worst_g:.2e}"))
        out.append(Check("fd", f"{model} hessian", worst_h <= HESS_RTOL, f"max rel err {worst_h:.2e}"))
    return out


def strain_grid(p, params: ChainParams, points: int = 20) -> np.ndarray:
    """``points`` strains strictly inside ``(F0, Fa*)``."""
    F0 = solve_F0(p).value
    Fa = solve_Fa_star(p, params, F0).value
    return F0 + (Fa - F0) * np.arange(1, points + 1) / (points + 1)


def check_prop31(alpha: float = 5.0, sizes=(8, 16, 40)) -> list[Check]:
    p = MorsePotential(alpha)
    out = []
    for n in sizes:
        params = ChainParams(n, 2)
        worst = 0.0
        for F in strain_grid(p, params):
            lam = stability_at(ATOMISTIC, Deformation.uniform(params, F), p).lambda_min
            exact = atomistic_stability_constant(p, F, params)
            worst = max(worst, abs(lam - exact) / abs(moduli(p, F).a_F))
        out.append(Check("prop31", f"N={n}", worst <= SPECTRAL_RTOL, f"max rel dev {worst:.2e}"))
    return out


def check_prop32(alpha: float = 5.0, sizes=((8, 2), (16, 4), (40, 10))) -> list[Check]:
    p = MorsePotential(alpha)
    out = []
    for n, k in sizes:
        params = ChainParams(n, k)
        worst = 0.0
        for F in strain_grid(p, params):
            lam = stability_at(QCL, Deformation.uniform(params, F), p).lambda_min
            a = moduli(p, F).a_F
            worst = max(worst, abs(lam - a) / abs(a))
        out.append(Check("prop32", f"N={n} K={k}", worst <= SPECTRAL_RTOL, f"max rel dev {worst:.2e}"))
    return out


def check_prop33(alpha: float = 5.0, sizes=((8, 2), (16, 4), (40, 10))) -> list[Check]:
    p = MorsePotential(alpha)
    out = []
    for n, k in sizes:
        params = ChainParams(n, k)
        worst, signs = 0.0, True
        for F in strain_grid(p, params):
            lam = stability_at(QNL, Deformation.uniform(params, F), p).lambda_min
            a = moduli(p, F).a_F
            signs &= np.sign(lam) == np.sign(a)
            worst = max(worst, abs(lam - a) / abs(a))
        ok = signs and worst <= SPECTRAL_RTOL
        out.append(Check("prop33", f"N={n} K={k}", bool(ok), f"sign agreement {signs}, max rel dev {worst:.2e}"))
    return out


def check_ghost(alpha: float = 5.0, sizes=((8, 2), (40, 10), (100, 20))) -> list[Check]:
    p = MorsePotential(alpha)
    F = solve_F0(p).value
    out = []
    for n, k in sizes:
        params = ChainParams(n, k)
        g = first_variation(QCE, Deformation.uniform(params, F), p).zero_mean()
        ref = ghost_force(p, F, params).zero_mean()
        err = float(np.max(np.abs(g - ref)))
        tol = 64 * np.finfo(float).eps * max(1.0, abs(p.derivative(F, 1)) + abs(p.derivative(2 * F, 1)))
        out.append(Check("ghost", f"N={n} K={k}", err <= tol, f"max coefficient err {err:.2e}"))
    return out


def check_lambdaK(alphas=(2.0, 5.0, 7.0), sizes=((40, 10), (100, 20), (40, 4))) -> list[Check]:
    out = []
    for n, k in sizes:
        params = ChainParams(n, k)
        vals = []
        for a in alphas:
            p = MorsePotential(a)
            F0 = solve_F0(p).value
            vals.append(qce_yF_lambdaK(p, params, (F0, solve_Fc_star(p, F0).value)))
        ok = all(0.5 <= v <= 1.0 for v in vals)
        out.append(Check("lambdaK", f"N={n} K={k}", ok, "lambda_K " + ", ".join(f"{v:.6f}" for v in vals)))
        # at y_F the two interface test functions have closed-form quadratic values
        p = MorsePotential(alphas[-1])
        F = solve_F0(p).value
        m = moduli(p, F)
        H = second_variation(QCE, Deformation.uniform(params, F), p)
        got = [H.quadratic(interface_test_function(params, v)) for v in ("at_K", "at_K_plus_2")]
        want = [m.a_F - 2.5 * m.phi2F_2, m.a_F + 0.5 * m.phi2F_2]
        err = max(abs(a - b) for a, b in zip(got, want)) / abs(m.a_F)
        out.append(Check("lambdaK", f"N={n} K={k} test functions", err <= SPECTRAL_RTOL,
                         f"max rel dev {err:.2e}"))
    return out


def check_mu(sizes=(8, 16, 40, 100)) -> list[Check]:
    out = []
    for n in sizes:
        params = ChainParams(n, 2)
        sc = mu_eps(params)
        # lowest Fourier mode attains the infimum of ||psi''|| / ||psi'||
        x = params.sites * params.eps
        psi = np.cos(math.pi * x)
        ratio = lp_norm(second_difference(psi, params), 2, params) / lp_norm(
            backward_difference(psi, params), 2, params)
        err = abs(ratio - sc.mu_eps) / sc.mu_eps
        out.append(Check("mu", f"N={n}", err <= 1e-12, f"mu_eps={sc.mu_eps:.12f}, rel dev {err:.2e}"))
    return out


def run(groups=None, seed: int = 0) -> list[Check]:
    groups = GROUPS if not groups else tuple(groups)
    unknown = set(groups) - set(GROUPS)
    if unknown:
        raise ValueError(f"unknown verify group(s) {sorted(unknown)}; choose from {GROUPS}")
    fns = {
        "fd": lambda: check_fd(seed),
        "prop31": check_prop31,
        "prop32": check_prop32,
        "prop33": check_prop33,
        "ghost": check_ghost,
        "lambdaK": check_lambdaK,
        "mu": check_mu,
    }
    out = []
    for g in GROUPS:
        if g in groups:
            out.extend(fns[g]())
    return out
