"""Stability of atomistic-to-continuum coupling on a periodic 1D chain.

The atomistic next-nearest-neighbour chain is compared with its local (QCL),
energy-based (QCE), quasi-nonlocal (QNL) and ghost-force-corrected (GFC)
quasicontinuum approximations through their coercivity constants and
critical strains.
"""

from .chain import (
    ChainParams,
    Deformation,
    Displacement,
    StrainVector,
    backward_difference,
    inner_product,
    lp_norm,
    second_difference,
    strain_to_displacement,
)
from .critical import (
    CriticalStrainResult,
    SweepRow,
    c_err,
    solve_F0,
    solve_Fa_star,
    solve_Fc_star,
    solve_Fqce_at_yF,
    solve_Fqce_star,
    solve_Ftilde_qce,
    sweep_alpha,
)
from .energies import (
    ATOMISTIC,
    GFC,
    QCE,
    QCL,
    QNL,
    FirstVariation,
    HessianForm,
    ModelKind,
    bond_inventory,
    energy,
    first_variation,
    second_variation,
)
from .errors import (
    BracketError,
    ContinuationStalled,
    DomainError,
    EigenSolverError,
    HypothesisError,
    InadmissibleStrain,
    NewtonError,
    NonConvexBond,
    QCError,
)
from .potentials import (
    LennardJonesPotential,
    MorsePotential,
    Potential,
    cauchy_born,
    deltas,
    moduli,
    parse_potential,
)
from .qce import (
    approx_equilibrium,
    ghost_force,
    ghost_profile,
    lemma_scaling_study,
    newton_solve,
)
from .stability import (
    StabilityReport,
    atomistic_stability_constant,
    cauchy_born_modulus,
    coercivity_eigenvalue,
    interface_test_function,
    mu_eps,
    qce_asymptotic_bound,
    qce_yF_lambdaK,
    stability_at,
)

__version__ = "0.1.0"
