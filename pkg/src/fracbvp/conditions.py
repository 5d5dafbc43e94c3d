"""
Fixed point index conditions and multiplicity certificates

(I0) at rho gives index 0 on V_rho = {u in K : min u < rho} when

    c2 ||gamma|| lambda0 + f_{rho,rho/c} / M > 1,

(I1) at rho gives index 1 on K_rho = {u in K : ||u|| < rho} when

    lambda0 ||gamma|| / (rho (1 - lambda~[gamma]))
        + (||gamma|| / (1 - lambda~[gamma]) int K + 1/m) f^{0,rho} < 1,

and chains of such rho with the right spacing (patterns S1..S6) give one,
two or three non-zero solutions in K.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import attr
import numpy as np

from fracbvp.constants import (
    PRINTED_INDEX0_THRESHOLD,
    PRINTED_INDEX1_THRESHOLD,
    PRINTED_PAIR_TOL,
    REFINE_HALF_WIDTH_STEPS,
    SAMPLE_GRID_SIZE,
    SAMPLE_LEVELS,
    SAMPLED_CAVEAT,
    THRESHOLD_NOTE,
)
from fracbvp.errors import ConditionError, DomainError
from fracbvp.fraccalc import GridFunction
from fracbvp.kernel import ConeConstants, cone_constants
from fracbvp.model import (
    Nonlinearity,
    ProblemParams,
    StieltjesFunctional,
    total_variation,
)
from utils.logutils import setup_logger
from utils.miscutils import log_spaced

LOGGER = setup_logger(__name__, log_level=logging.INFO)


class IndexKind(Enum):
    """Which index condition a check evaluates."""
    INDEX0 = "index0"
    INDEX1 = "index1"


class ExtremumKind(Enum):
    """Where an extremum of f came from."""
    SAMPLED = "sampled"
    ANALYTIC = "analytic-hint"


class Pattern(Enum):
    """Index condition patterns that guarantee positive solutions."""
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"
    S4 = "S4"
    S5 = "S5"
    S6 = "S6"


# spacing between consecutive rho of a chain: rho_i < rho_{i+1} ("lt") or
# rho_i / c < rho_{i+1} ("lt_over_c")
LT = "lt"
LT_OVER_C = "lt_over_c"

I0 = IndexKind.INDEX0
I1 = IndexKind.INDEX1

PATTERN_RULES: Dict[Pattern, Tuple[Tuple[IndexKind, ...], Tuple[str, ...]]] = {
    Pattern.S1: ((I0, I1), (LT_OVER_C,)),
    Pattern.S2: ((I1, I0), (LT,)),
    Pattern.S3: ((I0, I1, I0), (LT_OVER_C, LT)),
    Pattern.S4: ((I1, I0, I1), (LT, LT_OVER_C)),
    Pattern.S5: ((I0, I1, I0, I1), (LT_OVER_C, LT, LT_OVER_C)),
    Pattern.S6: ((I1, I0, I1, I0), (LT, LT_OVER_C, LT)),
}

SOLUTIONS_PER_PATTERN = {
    Pattern.S1: 1, Pattern.S2: 1,
    Pattern.S3: 2, Pattern.S4: 2,
    Pattern.S5: 3, Pattern.S6: 3,
}


@attr.s(kw_only=True, slots=True, frozen=True)
class ExtremumEstimate:
    """inf or sup of f(t, u)/rho over a box, with its provenance.

    `levels` holds the running estimate after each sampling level (empty
    for analytic hints).
    """
    value: float = attr.ib()
    kind: ExtremumKind = attr.ib(converter=ExtremumKind)
    levels: Tuple[float, ...] = attr.ib(default=(), converter=tuple)


def _sample_extremum(
    f: Nonlinearity,
    t_box: Tuple[float, float],
    u_box: Tuple[float, float],
    minimize: bool,
    grid_size: int = SAMPLE_GRID_SIZE,
    levels: int = SAMPLE_LEVELS,
) -> Tuple[float, Tuple[float, ...]]:
    """Extremum of f over a box by a tensor grid refined around the extremiser."""
    pick = np.argmin if minimize else np.argmax
    box = (t_box[0], t_box[1], u_box[0], u_box[1])
    best = None
    best_point = (t_box[0], u_box[0])
    history = []
    for _ in range(levels):
        t_grid = np.linspace(box[0], box[1], grid_size)
        u_grid = np.linspace(box[2], box[3], grid_size)
        t_mesh, u_mesh = np.meshgrid(t_grid, u_grid, indexing="ij")
        values = f(t_mesh, u_mesh)
        index = int(pick(values))
        candidate = float(values.flat[index])
        if best is None or (candidate < best if minimize else candidate > best):
            best = candidate
            best_point = (float(t_mesh.flat[index]), float(u_mesh.flat[index]))
        history.append(best)
        t_half = REFINE_HALF_WIDTH_STEPS * (box[1] - box[0]) / (grid_size - 1)
        u_half = REFINE_HALF_WIDTH_STEPS * (box[3] - box[2]) / (grid_size - 1)
        box = (
            max(t_box[0], best_point[0] - t_half), min(t_box[1], best_point[0] + t_half),
            max(u_box[0], best_point[1] - u_half), min(u_box[1], best_point[1] + u_half),
        )
    LOGGER.debug("sampled %s of %s over t%s u%s: %s at %s",
                 "min" if minimize else "max", f.name, t_box, u_box, best, best_point)
    return best, tuple(history)


def _check_rho(rho: float):
    if not rho > 0:
        raise DomainError("rho must be > 0, got {}".format(rho))


def f_inf_estimate(f: Nonlinearity, rho: float, c: float) -> ExtremumEstimate:
    """f_{rho,rho/c} = inf f(t, u)/rho over [0, 1] x [rho, rho/c].

    Sampled values over-estimate the true infimum.
    """
    _check_rho(rho)
    if not 0 < c <= 1:
        raise DomainError("cone constant c must lie in (0, 1], got {}".format(c))
    if f.inf_hint is not None:
        value = float(f.inf_hint(0.0, 1.0, rho, rho / c))
        return ExtremumEstimate(value=value / rho, kind=ExtremumKind.ANALYTIC)
    best, history = _sample_extremum(f, (0.0, 1.0), (rho, rho / c), minimize=True)
    return ExtremumEstimate(
        value=best / rho,
        kind=ExtremumKind.SAMPLED,
        levels=[level / rho for level in history],
    )


def f_sup_estimate(f: Nonlinearity, rho: float) -> ExtremumEstimate:
    """f^{0,rho} = sup f(t, u)/rho over [0, 1] x [0, rho].

    Sampled values under-estimate the true supremum.
    """
    _check_rho(rho)
    if f.sup_hint is not None:
        value = float(f.sup_hint(0.0, 1.0, 0.0, rho))
        return ExtremumEstimate(value=value / rho, kind=ExtremumKind.ANALYTIC)
    best, history = _sample_extremum(f, (0.0, 1.0), (0.0, rho), minimize=False)
    return ExtremumEstimate(
        value=best / rho,
        kind=ExtremumKind.SAMPLED,
        levels=[level / rho for level in history],
    )


def lambda0_for(L: StieltjesFunctional, rho: float) -> float:
    """A lambda0 with lambda[u] >= lambda0 rho on the boundary of V_rho.

    On that boundary u >= rho on [0, 1], so lambda[u] >= Lambda0 + rho Lambda_1.
    """
    _check_rho(rho)
    return L.lambda0 / rho + total_variation(L)


@attr.s(kw_only=True, slots=True, frozen=True)
class RhoCheck:
    """Outcome of one index condition at one rho."""
    rho: float = attr.ib()
    kind: IndexKind = attr.ib(converter=IndexKind)
    lhs: float = attr.ib()
    satisfied: bool = attr.ib()
    f_extremum: float = attr.ib()
    f_extremum_kind: ExtremumKind = attr.ib(converter=ExtremumKind)
    lambda0: Optional[float] = attr.ib(default=None)


def index0_constant_term(constants: ConeConstants, lambda0: float) -> float:
    """c2 ||gamma|| lambda0, the f-free part of (I0)."""
    return constants.c2 * constants.norm_gamma * lambda0


def index1_coefficient(constants: ConeConstants) -> float:
    """||gamma|| / (1 - lambda~[gamma]) int K + 1/m, the factor of f^{0,rho} in (I1)."""
    _check_coupling(constants)
    return (constants.norm_gamma / (1.0 - constants.tilde_lambda_gamma)
            * constants.int_script_K + constants.inv_m)


def _check_coupling(constants: ConeConstants):
    if constants.tilde_lambda_gamma >= 1.0:
        raise ConditionError(
            "lambda~[gamma] = {} >= 1: the index-1 condition does not apply".format(
                constants.tilde_lambda_gamma))


def check_index0(
    p: ProblemParams,
    L: StieltjesFunctional,
    f: Nonlinearity,
    rho: float,
    constants: Optional[ConeConstants] = None,
    lambda0: Optional[float] = None,
) -> RhoCheck:
    """Evaluate (I0) at `rho`.

    Args:
        constants (:class:`ConeConstants`): precomputed constants
            (default: None, computed from `p` and `L`)
        lambda0 (float): override of the bound lambda[u] >= lambda0 rho
            (default: None, use :func:`lambda0_for`)
    """
    _check_rho(rho)
    if constants is None:
        constants = cone_constants(p, L)
    if lambda0 is None:
        lambda0 = lambda0_for(L, rho)
    elif lambda0 < 0:
        raise DomainError("lambda0 must be >= 0, got {}".format(lambda0))
    estimate = f_inf_estimate(f, rho, constants.c)
    lhs = index0_constant_term(constants, lambda0) + estimate.value * constants.inv_M
    check = RhoCheck(
        rho=rho,
        kind=IndexKind.INDEX0,
        lhs=float(lhs),
        satisfied=bool(lhs > 1.0),
        f_extremum=estimate.value,
        f_extremum_kind=estimate.kind,
        lambda0=lambda0,
    )
    LOGGER.debug("%s", check)
    return check


def check_index1(
    p: ProblemParams,
    L: StieltjesFunctional,
    f: Nonlinearity,
    rho: float,
    constants: Optional[ConeConstants] = None,
) -> RhoCheck:
    """Evaluate (I1) at `rho`.

    Raises:
        ConditionError: if lambda~[gamma] >= 1.
    """
    _check_rho(rho)
    if constants is None:
        constants = cone_constants(p, L)
    coefficient = index1_coefficient(constants)
    estimate = f_sup_estimate(f, rho)
    lhs = (L.lambda0 * constants.norm_gamma
           / (rho * (1.0 - constants.tilde_lambda_gamma))
           + coefficient * estimate.value)
    check = RhoCheck(
        rho=rho,
        kind=IndexKind.INDEX1,
        lhs=float(lhs),
        satisfied=bool(lhs < 1.0),
        f_extremum=estimate.value,
        f_extremum_kind=estimate.kind,
    )
    LOGGER.debug("%s", check)
    return check


@attr.s(kw_only=True, slots=True, frozen=True)
class SpacingAudit:
    """One spacing requirement of a witness chain, e.g. rho1/c < rho2."""
    relation: str = attr.ib()
    lhs: float = attr.ib()
    rhs: float = attr.ib()
    holds: bool = attr.ib()

    @property
    def margin(self) -> float:
        """rhs - lhs; positive when the strict inequality holds."""
        return self.rhs - self.lhs


@attr.s(kw_only=True, slots=True, frozen=True)
class PatternWitness:
    """A rho chain realising a pattern."""
    pattern: Pattern = attr.ib(converter=Pattern)
    rhos: Tuple[float, ...] = attr.ib(converter=tuple)
    kinds: Tuple[IndexKind, ...] = attr.ib(converter=tuple)
    spacing: Tuple[SpacingAudit, ...] = attr.ib(converter=tuple)
    rigorous: bool = attr.ib()


def _gap_holds(gap: str, prev_rho: float, next_rho: float, c: float) -> bool:
    if gap == LT:
        return prev_rho < next_rho
    return prev_rho / c < next_rho


def _spacing_audit(gap: str, position: int, prev_rho: float, next_rho: float,
                   c: float) -> SpacingAudit:
    if gap == LT:
        relation = "rho{} < rho{}".format(position, position + 1)
        lhs = prev_rho
    else:
        relation = "rho{}/c < rho{}".format(position, position + 1)
        lhs = prev_rho / c
    return SpacingAudit(
        relation=relation,
        lhs=float(lhs),
        rhs=next_rho,
        holds=_gap_holds(gap, prev_rho, next_rho, c),
    )


def _find_chain(
    kinds: Sequence[IndexKind],
    gaps: Sequence[str],
    satisfied: Sequence[RhoCheck],
    c: float,
) -> Optional[List[RhoCheck]]:
    """Earliest feasible chain; greedy is exact since every gap is monotone."""
    chain: List[RhoCheck] = []
    for position, kind in enumerate(kinds):
        found = None
        for check in satisfied:
            if check.kind != kind:
                continue
            if chain and not _gap_holds(gaps[position - 1], chain[-1].rho, check.rho, c):
                continue
            found = check
            break
        if found is None:
            return None
        chain.append(found)
    return chain


def match_patterns(checks: Sequence[RhoCheck], c: float) -> Tuple[PatternWitness, ...]:
    """Every pattern S1..S6 realised by the satisfied checks, with a witness each."""
    satisfied = sorted(
        (check for check in checks if check.satisfied),
        key=lambda check: (check.rho, check.kind.value))
    witnesses = []
    for pattern, (kinds, gaps) in PATTERN_RULES.items():
        chain = _find_chain(kinds, gaps, satisfied, c)
        if chain is None:
            continue
        witnesses.append(PatternWitness(
            pattern=pattern,
            rhos=[check.rho for check in chain],
            kinds=[check.kind for check in chain],
            spacing=[
                _spacing_audit(gap, position + 1, chain[position].rho,
                               chain[position + 1].rho, c)
                for position, gap in enumerate(gaps)],
            rigorous=all(
                check.f_extremum_kind == ExtremumKind.ANALYTIC for check in chain),
        ))
    return tuple(witnesses)


def guaranteed_solutions(patterns: Sequence[Pattern]) -> int:
    """Number of non-zero solutions the satisfied patterns guarantee."""
    return max((SOLUTIONS_PER_PATTERN[pattern] for pattern in patterns), default=0)


@attr.s(kw_only=True, slots=True, frozen=True)
class MultiplicityCertificate:
    """Checks, the patterns they realise and the resulting solution count."""
    checks: Tuple[RhoCheck, ...] = attr.ib(converter=tuple)
    witnesses: Tuple[PatternWitness, ...] = attr.ib(converter=tuple)
    c: float = attr.ib()
    caveat: str = attr.ib(default=SAMPLED_CAVEAT)

    @property
    def satisfied_patterns(self) -> Tuple[Pattern, ...]:
        """Patterns with a witness chain."""
        return tuple(witness.pattern for witness in self.witnesses)

    @property
    def guaranteed_solutions(self) -> int:
        """0, 1, 2 or 3."""
        return guaranteed_solutions(self.satisfied_patterns)

    @property
    def gap_constraints(self) -> Tuple[SpacingAudit, ...]:
        """Spacing audits of every witness chain."""
        return tuple(audit for witness in self.witnesses for audit in witness.spacing)

    @property
    def rigorous(self) -> bool:
        """Some witness relies only on analytic extrema."""
        return any(witness.rigorous for witness in self.witnesses)


def _run_check(
    p: ProblemParams,
    L: StieltjesFunctional,
    f: Nonlinearity,
    rho: float,
    kind: IndexKind,
    constants: ConeConstants,
    lambda0: Optional[float],
) -> RhoCheck:
    if kind == IndexKind.INDEX0:
        return check_index0(p, L, f, rho, constants=constants, lambda0=lambda0)
    return check_index1(p, L, f, rho, constants=constants)


def run_checks(
    p: ProblemParams,
    L: StieltjesFunctional,
    f: Nonlinearity,
    rhos: Sequence[Tuple[float, Union[IndexKind, str]]],
    lambda0: Optional[float] = None,
    constants: Optional[ConeConstants] = None,
    workers: Optional[int] = None,
) -> List[RhoCheck]:
    """Evaluate the requested (rho, kind) checks, in input order.

    Args:
        workers (int): evaluate checks on a thread pool of this size
            (default: None, sequential). The result order never depends
            on it.
    """
    if constants is None:
        constants = cone_constants(p, L)
    requests = [(float(rho), IndexKind(kind)) for rho, kind in rhos]
    for rho, _kind in requests:
        _check_rho(rho)

    def _one(request):
        return _run_check(p, L, f, request[0], request[1], constants, lambda0)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(_one, requests))
    return [_one(request) for request in requests]


def certify(
    p: ProblemParams,
    L: StieltjesFunctional,
    f: Nonlinearity,
    rhos: Sequence[Tuple[float, Union[IndexKind, str]]],
    lambda0: Optional[float] = None,
    workers: Optional[int] = None,
) -> MultiplicityCertificate:
    """Run the checks for `rhos` and match patterns S1..S6 on them."""
    if not rhos:
        raise DomainError("certify needs at least one (rho, kind) pair")
    constants = cone_constants(p, L)
    checks = run_checks(p, L, f, rhos, lambda0=lambda0, constants=constants,
                        workers=workers)
    certificate = MultiplicityCertificate(
        checks=checks,
        witnesses=match_patterns(checks, constants.c),
        c=constants.c,
    )
    LOGGER.info("certificate: patterns=%s guaranteed_solutions=%d",
                [pattern.value for pattern in certificate.satisfied_patterns],
                certificate.guaranteed_solutions)
    return certificate


def scan_rho(
    p: ProblemParams,
    L: StieltjesFunctional,
    f: Nonlinearity,
    rho_min: float,
    rho_max: float,
    n: int,
    lambda0: Optional[float] = None,
    workers: Optional[int] = None,
) -> List[RhoCheck]:
    """Both checks at `n` log-spaced rho in [rho_min, rho_max], index0 first."""
    if not 0 < rho_min < rho_max:
        raise DomainError(
            "scan needs 0 < rho_min < rho_max, got {}, {}".format(rho_min, rho_max))
    if n < 2:
        raise DomainError("scan needs at least 2 points, got {}".format(n))
    requests = []
    for rho in log_spaced(rho_min, rho_max, n):
        requests.append((float(rho), IndexKind.INDEX0))
        requests.append((float(rho), IndexKind.INDEX1))
    return run_checks(p, L, f, requests, lambda0=lambda0, workers=workers)


@attr.s(kw_only=True, slots=True, frozen=True)
class ThresholdReport:
    """f-thresholds implied by (I0) and (I1) when lambda0 = 0.

    (I0) holds when f_{rho,rho/c} > index0_threshold and (I1) holds when
    f^{0,rho} < index1_threshold.
    """
    index0_threshold: float = attr.ib()
    index1_threshold: float = attr.ib()
    printed_index0: float = attr.ib(default=PRINTED_INDEX0_THRESHOLD)
    printed_index1: float = attr.ib(default=PRINTED_INDEX1_THRESHOLD)
    tol: float = attr.ib(default=PRINTED_PAIR_TOL)
    note: str = attr.ib(default=THRESHOLD_NOTE)

    @property
    def matches_unordered(self) -> bool:
        """The computed pair equals the printed pair up to order."""
        computed = sorted((self.index0_threshold, self.index1_threshold))
        printed = sorted((self.printed_index0, self.printed_index1))
        return all(abs(a - b) <= self.tol for a, b in zip(computed, printed))

    @property
    def assignment_matches(self) -> bool:
        """Each computed threshold equals the printed one for the same condition."""
        return (abs(self.index0_threshold - self.printed_index0) <= self.tol
                and abs(self.index1_threshold - self.printed_index1) <= self.tol)


def threshold_pair(
    p: ProblemParams,
    L: StieltjesFunctional,
    lambda0: Optional[float] = None,
) -> ThresholdReport:
    """Thresholds on f_{rho,rho/c} and f^{0,rho} for a functional with lambda0 = 0.

    Raises:
        ConditionError: if L.lambda0 != 0 (the thresholds then depend on rho)
            or lambda~[gamma] >= 1.
    """
    if L.lambda0 != 0:
        raise ConditionError("thresholds are rho-independent only for lambda0 = 0")
    constants = cone_constants(p, L)
    if lambda0 is None:
        lambda0 = total_variation(L)
    return ThresholdReport(
        index0_threshold=(1.0 - index0_constant_term(constants, lambda0)) * constants.M,
        index1_threshold=1.0 / index1_coefficient(constants),
    )


@attr.s(kw_only=True, slots=True, frozen=True)
class ShellMembership:
    """Where a grid function sits relative to K_rho and V_rho."""
    rho: float = attr.ib()
    norm: float = attr.ib()
    minimum: float = attr.ib()
    in_K_rho: bool = attr.ib()
    in_V_rho: bool = attr.ib()
    in_K_rho_over_c: bool = attr.ib()


def shell_membership(u: GridFunction, rho: float, c: float) -> ShellMembership:
    """Membership of u in K_rho, V_rho and K_{rho/c} (cone membership not checked)."""
    _check_rho(rho)
    norm = u.sup_norm()
    minimum = float(np.min(u.values))
    return ShellMembership(
        rho=rho,
        norm=norm,
        minimum=minimum,
        in_K_rho=norm < rho,
        in_V_rho=minimum < rho,
        in_K_rho_over_c=norm < rho / c,
    )


@attr.s(kw_only=True, slots=True, frozen=True)
class SolutionLocation:
    """Shells of one witness chain relative to a computed solution."""
    pattern: Pattern = attr.ib(converter=Pattern)
    shells: Tuple[ShellMembership, ...] = attr.ib(converter=tuple)


def locate_solution(
    u: GridFunction,
    certificate: MultiplicityCertificate,
) -> Tuple[SolutionLocation, ...]:
    """Pair a computed solution with every witness chain of `certificate`.

    This only reports positions; it does not claim that `u` is one of the
    solutions whose existence the certificate guarantees.
    """
    return tuple(
        SolutionLocation(
            pattern=witness.pattern,
            shells=[shell_membership(u, rho, certificate.c) for rho in witness.rhos],
        )
        for witness in certificate.witnesses)
