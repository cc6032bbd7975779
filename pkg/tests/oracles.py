"""Independent reference implementations used only by the tests.

Nothing here goes through ``bond_inventory``: energies are summed atom by
atom from site positions, the QCE first variation is the hand-collected
per-element formula, and coercivity constants come from a generalized
eigenproblem in site coordinates.
"""

import math

import numpy as np
import scipy.linalg


def positions(strains, n_half):
    """Site positions ``y_ell`` (offset so ``y_{-N}`` = 0) and the period length."""
    eps = 1.0 / n_half
    y = eps * np.cumsum(strains)
    return y, eps * float(np.sum(strains))


class Sites:
    """Periodically extended positions indexed by the site label ``ell``."""

    def __init__(self, y, length, n_half):
        self.y, self.L, self.N = np.asarray(y, float), length, n_half

    def __call__(self, ell):
        j = ell + self.N - 1
        q, r = divmod(j, 2 * self.N)
        return self.y[r] + q * self.L

    def strain(self, ell):
        return (self(ell) - self(ell - 1)) * self.N


def _atom_energy_a(phi, Y, ell):
    eps = 1.0 / Y.N
    return 0.5 * (
        phi(Y.strain(ell))
        + phi(Y.strain(ell + 1))
        + phi((Y(ell) - Y(ell - 2)) / eps)
        + phi((Y(ell + 2) - Y(ell)) / eps)
    )


def _atom_energy_c(phi, Y, ell):
    a, b = Y.strain(ell), Y.strain(ell + 1)
    return 0.5 * (phi(a) + phi(b) + phi(2 * a) + phi(2 * b))


def direct_energy(tag, strains, phi, n_half, k_interface):
    """Energy per period from the per-atom (or per-interaction) definitions."""
    N, K = n_half, k_interface
    eps = 1.0 / N
    Y = Sites(*positions(strains, N), N)
    sites = range(-N + 1, N + 1)
    if tag == "atomistic":
        return eps * sum(_atom_energy_a(phi, Y, l) for l in sites)
    if tag == "qcl":
        return eps * sum(_atom_energy_c(phi, Y, l) for l in sites)
    if tag == "qce":
        return eps * sum(
            _atom_energy_a(phi, Y, l) if -K <= l <= K else _atom_energy_c(phi, Y, l) for l in sites
        )
    if tag == "qnl":
        total = 0.0
        for l in sites:
            total += phi(Y.strain(l))
            if -K - 1 <= l <= K + 1:
                total += phi((Y(l + 1) - Y(l - 1)) / eps)
            else:
                total += 0.5 * (phi(2 * Y.strain(l)) + phi(2 * Y.strain(l + 1)))
        return eps * total
    raise ValueError(tag)


def _qce_right_half(s, dphi, N, K, ell):
    """Collected coefficient of ``u'_ell`` for ``1 <= ell <= N`` (right half of the chain)."""

    def S(m):
        return s[(m + N - 1) % (2 * N)]

    if ell <= K - 1:
        return dphi(S(ell)) + dphi(S(ell - 1) + S(ell)) + dphi(S(ell) + S(ell + 1))
    if ell == K:
        return dphi(S(K)) + dphi(S(K - 1) + S(K)) + 0.5 * dphi(S(K) + S(K + 1))
    if ell == K + 1:
        return (dphi(S(K + 1)) + 0.5 * dphi(S(K) + S(K + 1)) + 0.5 * dphi(S(K + 1) + S(K + 2))
                + dphi(2 * S(K + 1)))
    if ell == K + 2:
        return dphi(S(K + 2)) + 0.5 * dphi(S(K + 1) + S(K + 2)) + 2 * dphi(2 * S(K + 2))
    return dphi(S(ell)) + 2 * dphi(2 * S(ell))


def qce_first_variation_closed_form(strains, dphi, n_half, k_interface):
    """Per-element QCE coefficients; the left half by the reflection ``ell -> 1 - ell``."""
    N, K = n_half, k_interface
    s = np.asarray(strains, float)
    ells = np.arange(-N + 1, N + 1)
    mirrored = s[(1 - ells + N - 1) % (2 * N)]
    g = np.empty(2 * N)
    for i, ell in enumerate(ells):
        if ell >= 1:
            g[i] = _qce_right_half(s, dphi, N, K, ell)
        else:
            g[i] = _qce_right_half(mirrored, dphi, N, K, 1 - ell)
    return g


def difference_matrix(n_half):
    """Backward difference ``u -> u'`` as a dense periodic matrix."""
    n = 2 * n_half
    return (np.eye(n) - np.roll(np.eye(n), 1, axis=0)) * n_half


def generalized_min_eigenvalue(site_hessian, n_half):
    """``min u^T H u / (eps |Du|^2)`` over zero-mean ``u`` via a null-space basis and ``eigh(A, B)``."""
    n = 2 * n_half
    eps = 1.0 / n_half
    Z = scipy.linalg.null_space(np.ones((1, n)))
    D = difference_matrix(n_half)
    A = Z.T @ site_hessian @ Z
    B = eps * Z.T @ D.T @ D @ Z
    w = scipy.linalg.eigh(0.5 * (A + A.T), 0.5 * (B + B.T), eigvals_only=True)
    return float(w[0])


def fd_site_hessian_of_energy(energy_of_sites, u, h=1e-4):
    """Second-order central differences of a scalar function of site displacements."""
    n = len(u)
    H = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            def f(di, dj):
                v = u.copy()
                v[i] += di
                v[j] += dj
                return energy_of_sites(v)
            H[i, j] = H[j, i] = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h)
    return H


def mu_eps_brute(n_half):
    """``min ||psi''|| / ||psi'||`` over zero-mean ``psi`` from a dense generalized eigenproblem."""
    n = 2 * n_half
    eps = 1.0 / n_half
    D = difference_matrix(n_half)
    Z = scipy.linalg.null_space(np.ones((1, n)))
    D2 = (np.roll(np.eye(n), -1, axis=0) - 2 * np.eye(n) + np.roll(np.eye(n), 1, axis=0)) * n_half**2
    A = eps * Z.T @ D2.T @ D2 @ Z
    B = eps * Z.T @ D.T @ D @ Z
    w = scipy.linalg.eigh(A, B, eigvals_only=True)
    return math.sqrt(w[0])


def morse(alpha, k=0):
    """Morse derivatives written out by hand, for cross-checking the potential classes."""
    def f(r):
        x = math.exp(-alpha * (r - 1))
        return [
            x * x - 2 * x,
            -2 * alpha * x * x + 2 * alpha * x,
            4 * alpha**2 * x * x - 2 * alpha**2 * x,
            -8 * alpha**3 * x * x + 2 * alpha**3 * x,
            16 * alpha**4 * x * x - 2 * alpha**4 * x,
        ][k]
    return f


def gfc_oracle(y_strains, p, params, F):
    """``E_qce(y) - E'_qce(y_F)[y - y_F]`` with the hand-collected first variation."""
    N, K = params.n_half, params.k_interface
    g = qce_first_variation_closed_form(np.full(params.size, F), lambda r: p.derivative(r, 1), N, K)
    return direct_energy("qce", y_strains, p, N, K) - params.eps * np.dot(g, y_strains - F)


def oracle_energy(model, s, p, params):
    if model.tag == "gfc":
        return gfc_oracle(s, p, params, model.linearization_strain)
    return direct_energy(model.tag, s, p, params.n_half, params.k_interface)


def fd_gradient(model, s, p, params, h=1e-6):
    """Central differences of the oracle energy in the site positions."""
    n = params.size
    g = np.empty(n)
    for i in range(n):
        d = np.zeros(n)
        d[i], d[(i + 1) % n] = h / params.eps, -h / params.eps
        g[i] = (oracle_energy(model, s + d, p, params) - oracle_energy(model, s - d, p, params)) / (2 * h)
    return g


def fd_hessian(model, s, p, params, h=2e-5):
    """Second-order central differences of the oracle energy in the site positions."""
    n = params.size
    inv = 1.0 / params.eps

    def shift(i, t):
        d = np.zeros(n)
        d[i], d[(i + 1) % n] = t * inv, -t * inv
        return d

    H = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            vals = [oracle_energy(model, s + shift(i, a) + shift(j, b), p, params)
                    for a, b in ((h, h), (h, -h), (-h, h), (-h, -h))]
            H[i, j] = H[j, i] = (vals[0] - vals[1] - vals[2] + vals[3]) / (4 * h * h)
    return H
