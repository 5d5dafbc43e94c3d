"""
Command line front end

    python -m fracbvp constants --config run.ini
    python -m fracbvp certify --config run.ini --out results/
    python -m fracbvp solve --config run.ini --out results/
    python -m fracbvp verify --config run.ini

Reports are JSON on stdout, or `<out>/<command>.json` with --out. `solve`
also writes `solution.csv` into --out (default: the working directory).
Exit codes: 0 success (a missing certificate or a non-converged solve is
still a success), 2 config or expression error, 3 parameters outside the
regime, 4 numeric failure.
"""
import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from fracbvp import config as run_config
from fracbvp.conditions import (
    IndexKind,
    MultiplicityCertificate,
    certify,
    locate_solution,
    threshold_pair,
)
from fracbvp.constants import MIN_VERIFY_NODES, VERSION
from fracbvp.errors import (
    ConfigError,
    DomainError,
    ExpressionError,
    FracBvpError,
    RegimeError,
)
from fracbvp.fraccalc import GridFunction
from fracbvp.kernel import ConeConstants, cone_constants
from fracbvp.model import validate_regime
from fracbvp.reporting import (
    dumps_report,
    make_report,
    read_solution,
    to_jsonable,
    write_report,
    write_solution,
)
from fracbvp.solver import linear_constant_oracle, picard_solve, verify
from utils.logutils import set_log_level, setup_logger
from utils.miscutils import log_spaced, try_

LOGGER = setup_logger(__name__, log_level=logging.INFO)

COMMANDS = ("constants", "certify", "solve", "verify")
SOLUTION_FILE = "solution.csv"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_REGIME = 3
EXIT_NUMERIC = 4


def _constants_body(constants: ConeConstants) -> Dict[str, Any]:
    body = to_jsonable(constants)
    body["M"] = constants.M
    body["c_matches_printed"] = constants.c_matches_printed
    return body


def cmd_constants(config: run_config.RunConfig) -> Dict[str, Any]:
    """Regime report, cone constants and, for lambda0 = 0, the f-thresholds."""
    p = run_config.build_params(config)
    L = run_config.build_functional(config)
    regime = validate_regime(p)
    constants = cone_constants(p, L)
    if abs(constants.printed_inv_M - constants.inv_M) > 1e-12:
        LOGGER.warning("1/M = %.6f differs from the printed fraction %.6f (= M)",
                       constants.inv_M, constants.printed_inv_M)
    thresholds = None
    if L.lambda0 == 0:
        thresholds = try_(threshold_pair, p, L, _default=None)
    body = {
        "regime": {
            "kernel_margin": regime.kernel_margin,
            "weight_margin": regime.weight_margin,
            "inv_M_margin": regime.inv_M_margin,
            "holds": regime.holds,
            "inv_M_positive": regime.inv_M_positive,
        },
        "constants": _constants_body(constants),
        "thresholds": None,
    }
    if thresholds is not None:
        body["thresholds"] = {
            "index0_threshold": thresholds.index0_threshold,
            "index1_threshold": thresholds.index1_threshold,
            "printed_index0": thresholds.printed_index0,
            "printed_index1": thresholds.printed_index1,
            "tol": thresholds.tol,
            "matches_unordered": thresholds.matches_unordered,
            "assignment_matches": thresholds.assignment_matches,
            "note": thresholds.note,
        }
    return make_report("constants", config.as_dict(), body)


def rho_requests(section: run_config.CertifySection) -> List[Tuple[float, IndexKind]]:
    """Expand the [certify] section into (rho, kind) checks; bare rhos get both."""
    if section.is_scan:
        pairs = [(float(rho), None)
                 for rho in log_spaced(section.scan_min, section.scan_max, section.scan_n)]
    else:
        pairs = list(section.rhos)
    requests = []
    for rho, kind in pairs:
        if kind is None:
            requests.append((rho, IndexKind.INDEX0))
            requests.append((rho, IndexKind.INDEX1))
        else:
            requests.append((rho, IndexKind(kind)))
    return requests


def _certificate_body(certificate: MultiplicityCertificate) -> Dict[str, Any]:
    return {
        "checks": certificate.checks,
        "witnesses": certificate.witnesses,
        "c": certificate.c,
        "caveat": certificate.caveat,
        "satisfied_patterns": certificate.satisfied_patterns,
        "guaranteed_solutions": certificate.guaranteed_solutions,
        "gap_constraints": certificate.gap_constraints,
        "rigorous": certificate.rigorous,
    }


def _run_certify(config: run_config.RunConfig, p, L, f) -> MultiplicityCertificate:
    section = config.require("certify")
    return certify(p, L, f, rho_requests(section),
                   lambda0=section.lambda0_override, workers=section.workers)


def cmd_certify(config: run_config.RunConfig) -> Dict[str, Any]:
    """Index checks at the configured rhos and the patterns they realise."""
    p = run_config.build_params(config)
    L = run_config.build_functional(config)
    f = run_config.build_nonlinearity(config)
    certificate = _run_certify(config, p, L, f)
    return make_report(
        "certify", config.as_dict(), {"certificate": _certificate_body(certificate)})


def _initial_guess(p, L, section: run_config.SolveSection) -> GridFunction:
    if section.u0_kind == "oracle":
        nodes = GridFunction.uniform(section.n_nodes).nodes
        try:
            return linear_constant_oracle(p, L, section.u0_value, nodes)
        except DomainError as exc:
            raise ConfigError("[solve] u0 = oracle: {}".format(exc))
    return GridFunction.uniform(
        section.n_nodes, lambda nodes: np.full_like(nodes, section.u0_value))


def cmd_solve(config: run_config.RunConfig, out_dir: Optional[str] = None) -> Dict[str, Any]:
    """Picard solve, write the solution CSV and verify it.

    When the config also has a [certify] section, the solution is placed
    relative to the shells of every witness chain.
    """
    p = run_config.build_params(config)
    L = run_config.build_functional(config)
    f = run_config.build_nonlinearity(config)
    section = config.require("solve")
    constants = cone_constants(p, L)
    outcome = picard_solve(p, L, f, _initial_guess(p, L, section),
                           tol=section.tol, max_iter=section.max_iter)
    write_solution(outcome.solution, os.path.join(out_dir or ".", SOLUTION_FILE))
    residuals = verify(p, L, f, outcome.solution, constants.c)
    body = {
        "solve": {
            "iterations": outcome.iterations,
            "residual_fixed_point": outcome.residual_fixed_point,
            "converged": outcome.converged,
            "tol": outcome.tol,
            "clamp_events": outcome.clamp_events,
            "diverged": outcome.diverged,
            "n_nodes": outcome.solution.size,
            "sup_norm": outcome.solution.sup_norm(),
        },
        "residuals": _residual_body(residuals),
        "solution_file": SOLUTION_FILE,
        "locations": None,
    }
    if config.certify is not None:
        certificate = _run_certify(config, p, L, f)
        body["locations"] = locate_solution(outcome.solution, certificate)
    return make_report("solve", config.as_dict(), body)


def _residual_body(residuals) -> Dict[str, Any]:
    return {
        "ode_residual": residuals.ode_residual,
        "bc0_residual": residuals.bc0_residual,
        "bc1_residual": residuals.bc1_residual,
        "cone_margin": residuals.cone_margin,
        "nonneg": residuals.nonneg,
        "in_cone": residuals.in_cone,
    }


def cmd_verify(config: run_config.RunConfig) -> Dict[str, Any]:
    """Residuals and cone margin of the solution CSV named in [verify]."""
    p = run_config.build_params(config)
    L = run_config.build_functional(config)
    f = run_config.build_nonlinearity(config)
    section = config.require("verify")
    u = read_solution(config.resolve_path(section.solution))
    c = section.c if section.c is not None else cone_constants(p, L).c
    if not u.is_uniform() or u.size < MIN_VERIFY_NODES:
        raise ConfigError("[verify] solution {} needs a uniform mesh of at least {} "
                          "nodes, got {}".format(section.solution, MIN_VERIFY_NODES, u.size))
    residuals = verify(p, L, f, u, c)
    return make_report(
        "verify", config.as_dict(), {"c": c, "residuals": _residual_body(residuals)})


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per report."""
    parser = argparse.ArgumentParser(
        prog="fracbvp",
        description="Constants, multiplicity certificates and Nystrom solutions "
                    "of a nonlocal Caputo boundary value problem.")
    parser.add_argument("--version", action="version", version=VERSION)
    sub = parser.add_subparsers(dest="command")
    sub.required = True
    helps = {
        "constants": "cone constants, regime report and f-thresholds",
        "certify": "index checks and multiplicity patterns",
        "solve": "Picard solve, solution CSV and residual report",
        "verify": "residual report for a solution CSV",
    }
    for command in COMMANDS:
        command_parser = sub.add_parser(command, help=helps[command])
        command_parser.add_argument("--config", required=True, help="INI run config")
        command_parser.add_argument("--out", default=None, help="output directory")
        command_parser.add_argument(
            "--log-level", default="INFO",
            choices=("DEBUG", "INFO", "WARNING", "ERROR"),
            help="log level on stderr (default: INFO)")
    return parser


def run(args: argparse.Namespace) -> Dict[str, Any]:
    """Dispatch to the subcommand; raises on failure."""
    config = run_config.load_config(args.config)
    if args.command == "constants":
        return cmd_constants(config)
    if args.command == "certify":
        return cmd_certify(config)
    if args.command == "solve":
        return cmd_solve(config, out_dir=args.out)
    return cmd_verify(config)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    set_log_level("fracbvp", args.log_level)
    set_log_level("utils", args.log_level)
    try:
        report = run(args)
    except (ConfigError, ExpressionError) as exc:
        LOGGER.error("invalid configuration: %s", exc)
        return EXIT_CONFIG
    except RegimeError as exc:
        LOGGER.error("%s", exc)
        return EXIT_REGIME
    except (FracBvpError, ArithmeticError) as exc:
        LOGGER.error("numeric failure: %s", exc)
        return EXIT_NUMERIC
    if args.out:
        write_report(report, os.path.join(args.out, "{}.json".format(args.command)))
    else:
        sys.stdout.write(dumps_report(report))
    return EXIT_OK
