"""Command-line entry point: ``qcstab <command> [options]``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 solver failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass, field

from . import verify
from .chain import ChainParams
from .critical import (
    SWEEP_COLUMNS,
    c_err,
    format_float,
    rows_to_csv,
    solve_F0,
    solve_Fa_star,
    solve_Fc_star,
    solve_Fqce_at_yF,
    solve_Fqce_star,
    solve_Ftilde_qce,
    sweep_alpha,
)
from .errors import QCError
from .potentials import LennardJonesPotential, MorsePotential, parse_potential
from .qce import lemma_scaling_study

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3

COMMANDS = ("table-cerr", "critical-strains", "sweep", "verify", "lemma-scaling")
DEFAULT_ALPHAS = {"sweep": "2:7:0.25", "lemma-scaling": "3:8:1"}

logger = logging.getLogger("qcstab")


class ConfigError(ValueError):
    pass


def parse_range(spec: str) -> list[float]:
    """``a:b:step`` (both ends included when ``step`` divides ``b - a``), ``a,b,c`` or ``a``."""
    text = spec.strip()
    try:
        if ":" in text:
            parts = [float(x) for x in text.split(":")]
            if len(parts) != 3:
                raise ConfigError(f"range {spec!r} must be a:b:step")
            a, b, step = parts
            if not step > 0 or b < a:
                raise ConfigError(f"range {spec!r} needs step > 0 and a <= b")
            n = math.floor((b - a) / step + 1e-9)
            return [round(a + i * step, 12) for i in range(n + 1)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"cannot parse range {spec!r}: {exc}") from exc


@dataclass
class RunConfig:
    command: str
    potentials: list = field(default_factory=list)
    n_half: int = 40
    k_interface: int = 10
    alpha_range: list = field(default_factory=list)
    output_path: str = "-"
    seed: int = 0
    groups: list = field(default_factory=list)
    jobs: int = 1

    def validate(self):
        """Check everything that can be checked before any computation starts."""
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        try:
            params = ChainParams(self.n_half, self.k_interface)
        except ValueError as exc:
            raise ConfigError(f"invalid chain size: {exc}") from exc
        try:
            pots = [parse_potential(s) for s in self.potentials]
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.command in ("sweep", "lemma-scaling"):
            if not self.alpha_range:
                raise ConfigError("alpha range is empty")
            bad = [a for a in self.alpha_range if not a >= 1]
            if bad:
                raise ConfigError(f"Morse alpha must be >= 1, got {bad}")
        if self.command == "critical-strains" and len(pots) != 1:
            raise ConfigError("critical-strains needs exactly one --potential")
        bad_groups = set(self.groups) - set(verify.GROUPS)
        if bad_groups:
            raise ConfigError(f"unknown verify group(s) {sorted(bad_groups)}; choose from {verify.GROUPS}")
        if self.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        return params, pots


def _emit(text: str, path: str):
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def cmd_table_cerr(cfg: RunConfig) -> int:
    _, pots = cfg.validate()
    if not pots:
        pots = [MorsePotential(a) for a in range(2, 8)] + [LennardJonesPotential()]
    rows, status = [], EXIT_OK
    for p in pots:
        try:
            value = c_err(p).value
        except QCError as exc:
            print(f"error: {p.name}: {type(exc).__name__}: {exc}", file=sys.stderr)
            value, status = float("nan"), EXIT_SOLVER
        rows.append({"potential": p.name, "c_err": value})
    _emit(rows_to_csv(rows, ("potential", "c_err")), cfg.output_path)
    return status


def cmd_critical_strains(cfg: RunConfig) -> int:
    params, (p,) = cfg.validate()
    F0 = solve_F0(p).value
    Fc = solve_Fc_star(p, F0).value
    results = [
        ("F0", lambda: F0),
        ("Fc_star", lambda: Fc),
        ("Fa_star", lambda: solve_Fa_star(p, params, F0).value),
        ("Ftilde_qce", lambda: solve_Ftilde_qce(p, F0).value),
        ("Fqce_star", lambda: solve_Fqce_star(p, params, F0, Fc).value),
        ("Fqce_at_yF", lambda: solve_Fqce_at_yF(p, params, F0, Fc).value),
    ]
    rows, status = [], EXIT_OK
    for kind, fn in results:
        try:
            value = fn()
        except QCError as exc:
            print(f"error: {kind}: {type(exc).__name__}: {exc}", file=sys.stderr)
            value, status = float("nan"), EXIT_SOLVER
        rows.append({"potential": p.name, "kind": kind, "value": value})
    _emit(rows_to_csv(rows, ("potential", "kind", "value")), cfg.output_path)
    return status


def cmd_sweep(cfg: RunConfig) -> int:
    params, _ = cfg.validate()
    rows = sweep_alpha(cfg.alpha_range, params, jobs=cfg.jobs)
    _emit(rows_to_csv(rows, SWEEP_COLUMNS), cfg.output_path)
    failed = [r for r in rows if r.error]
    for r in failed:
        print(f"error: alpha={format_float(r.alpha)}: {r.error}", file=sys.stderr)
    return EXIT_SOLVER if failed else EXIT_OK


def cmd_lemma_scaling(cfg: RunConfig) -> int:
    params, _ = cfg.validate()
    res = lemma_scaling_study(cfg.alpha_range, params)
    rows = [{"alpha": r.alpha, "strain": r.strain, "delta1": r.delta1, "delta2": r.delta2,
             "predictor": r.predictor, "error": r.error} for r in res.rows]
    _emit(rows_to_csv(rows, ("alpha", "strain", "delta1", "delta2", "predictor", "error")),
          cfg.output_path)
    print(f"log-log slope {res.slope:.6f}, intercept {res.intercept:.6f}", file=sys.stderr)
    failed = [r for r in res.rows if not r.ok]
    for r in failed:
        print(f"error: alpha={format_float(r.alpha)}: {r.note}", file=sys.stderr)
    return EXIT_SOLVER if failed else EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    cfg.validate()
    checks = verify.run(cfg.groups or None, seed=cfg.seed)
    lines = [c.line() for c in checks]
    n_fail = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - n_fail}/{len(checks)} checks passed")
    _emit("\n".join(lines) + "\n", cfg.output_path)
    return EXIT_VERIFY if n_fail else EXIT_OK


HANDLERS = {
    "table-cerr": cmd_table_cerr,
    "critical-strains": cmd_critical_strains,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "lemma-scaling": cmd_lemma_scaling,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcstab",
        description="Stability constants and critical strains of quasicontinuum approximations of a periodic chain.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, chain=True, alpha=False):
        if chain:
            p.add_argument("--n", type=int, default=40, dest="n_half", help="half the number of atoms N (default 40)")
            p.add_argument("--k", type=int, default=10, dest="k_interface", help="atomistic half-width K (default 10)")
        if alpha:
            p.add_argument("--alpha", default=None, help="Morse stiffnesses as a:b:step, a,b,c or a single value")
        p.add_argument("--out", default="-", dest="output_path", help="output file, '-' for stdout (default)")

    p = sub.add_parser("table-cerr", help="error constant C_err per potential")
    p.add_argument("--potential", action="append", default=[], help="e.g. morse:alpha=2 or lj (repeatable)")
    common(p, chain=False)

    p = sub.add_parser("critical-strains", help="all critical strains for one potential")
    p.add_argument("--potential", action="append", default=[], required=True)
    common(p)

    p = sub.add_parser("sweep", help="critical strains over a range of Morse stiffnesses")
    common(p, alpha=True)
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")

    p = sub.add_parser("lemma-scaling", help="QCE equilibrium vs its first-order approximation")
    common(p, alpha=True)

    p = sub.add_parser("verify", help="run the built-in invariant checks")
    p.add_argument("--group", action="append", default=[], dest="groups", choices=verify.GROUPS)
    p.add_argument("--seed", type=int, default=0, help="seed for random deformations (default 0)")
    common(p, chain=False)
    return parser


def config_from_args(args) -> RunConfig:
    alpha = getattr(args, "alpha", None)
    if alpha is None:
        alpha = DEFAULT_ALPHAS.get(args.command)
    return RunConfig(
        command=args.command,
        potentials=list(getattr(args, "potential", [])),
        n_half=getattr(args, "n_half", 40),
        k_interface=getattr(args, "k_interface", 10),
        alpha_range=parse_range(alpha) if alpha else [],
        output_path=args.output_path,
        seed=getattr(args, "seed", 0),
        groups=list(getattr(args, "groups", [])),
        jobs=getattr(args, "jobs", 1),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = config_from_args(args)
        return HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QCError as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"config error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
