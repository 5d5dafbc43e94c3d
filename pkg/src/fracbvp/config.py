"""
Run configuration

A run is described by an INI file read with `configparser`:

    [problem]
    preset = example            ; or alpha / beta / eta (override the preset)

    [functional]
    lambda0 = 0
    atoms = 0.25:0.5, 0.6:0.1   ; xi:weight pairs
    density = weights.csv       ; optional table with columns t,w

    [f]
    expr = 1 + u/(1 + u)        ; or builtin = constant|linear|piecewise_linear
    params = kappa=2            ;    with knots=u1:v1 u2:v2 for piecewise_linear

    [certify]
    rhos = 0.5, 2:index0, 8:index1   ; bare rho runs both checks
    scan_min = 0.1                   ; or a log-spaced scan
    scan_max = 10
    scan_n = 20
    lambda0_override = 0.5
    workers = 4

    [solve]
    n_nodes = 1025
    tol = 1e-10
    max_iter = 500
    u0 = constant:0             ; or oracle:<sigma>

    [verify]
    solution = solution.csv
    c = 0.132

Relative paths are resolved against the directory of the config file.
"""
import configparser
import logging
import os
from typing import Any, Dict, List, Optional, Tuple

import attr
import pandas as pd

from fracbvp import model
from fracbvp.constants import (
    DEFAULT_MAX_ITER,
    DEFAULT_N_NODES,
    DEFAULT_TOL,
    MIN_VERIFY_NODES,
    PRESETS,
)
from fracbvp.conditions import IndexKind
from fracbvp.errors import ConfigError, DomainError
from fracbvp.fraccalc import GridFunction
from utils.logutils import setup_logger

LOGGER = setup_logger(__name__, log_level=logging.INFO)

SECTIONS = ("problem", "functional", "f", "certify", "solve", "verify")


def _float(section: str, key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError("[{}] {} is not a number: '{}'".format(section, key, text))


def _int(section: str, key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError("[{}] {} is not an integer: '{}'".format(section, key, text))


def _split_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _pair(section: str, key: str, item: str) -> Tuple[str, str]:
    parts = item.split(":")
    if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
        raise ConfigError(
            "[{}] {}: expected 'a:b', got '{}'".format(section, key, item))
    return parts[0].strip(), parts[1].strip()


def str_to_atoms(text: str) -> Tuple[Tuple[float, float], ...]:
    """'0.25:0.5, 0.6:0.1' -> ((0.25, 0.5), (0.6, 0.1))."""
    atoms = []
    for item in _split_list(text):
        xi, weight = _pair("functional", "atoms", item)
        atoms.append((_float("functional", "atoms", xi),
                      _float("functional", "atoms", weight)))
    return tuple(atoms)


def str_to_rho_requests(text: str) -> Tuple[Tuple[float, Optional[str]], ...]:
    """'0.5, 2:index0' -> ((0.5, None), (2.0, 'index0')); None means both checks."""
    requests = []
    for item in _split_list(text):
        if ":" in item:
            rho, kind = _pair("certify", "rhos", item)
            try:
                kind = IndexKind(kind).value
            except ValueError:
                raise ConfigError(
                    "[certify] rhos: unknown check '{}' (use index0 or index1)".format(kind))
            requests.append((_float("certify", "rhos", rho), kind))
        else:
            requests.append((_float("certify", "rhos", item), None))
    return tuple(requests)


def str_to_params(text: str) -> Dict[str, str]:
    """'kappa=2, knots=0:0 1:2' -> {'kappa': '2', 'knots': '0:0 1:2'}."""
    params = {}
    for item in _split_list(text):
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError("[f] params: expected 'key=value', got '{}'".format(item))
        params[key.strip()] = value.strip()
    return params


@attr.s(kw_only=True, slots=True, frozen=True)
class ProblemSection:
    """[problem]"""
    alpha: float = attr.ib()
    beta: float = attr.ib()
    eta: float = attr.ib()
    preset: Optional[str] = attr.ib(default=None)


@attr.s(kw_only=True, slots=True, frozen=True)
class FunctionalSection:
    """[functional]"""
    lambda0: float = attr.ib(default=0.0)
    atoms: Tuple[Tuple[float, float], ...] = attr.ib(default=())
    density: Optional[str] = attr.ib(default=None)


@attr.s(kw_only=True, slots=True, frozen=True)
class NonlinearitySection:
    """[f]: exactly one of `expr` and `builtin`."""
    expr: Optional[str] = attr.ib(default=None)
    builtin: Optional[str] = attr.ib(default=None)
    params: Dict[str, str] = attr.ib(factory=dict)

    def __attrs_post_init__(self):
        if (self.expr is None) == (self.builtin is None):
            raise ConfigError("[f] needs exactly one of 'expr' and 'builtin'")
        if self.builtin is not None and self.builtin not in model.BUILTINS:
            raise ConfigError("[f] unknown builtin '{}' (known: {})".format(
                self.builtin, ", ".join(sorted(model.BUILTINS))))


@attr.s(kw_only=True, slots=True, frozen=True)
class CertifySection:
    """[certify]: an explicit rho list or a scan."""
    rhos: Tuple[Tuple[float, Optional[str]], ...] = attr.ib(default=())
    scan_min: Optional[float] = attr.ib(default=None)
    scan_max: Optional[float] = attr.ib(default=None)
    scan_n: Optional[int] = attr.ib(default=None)
    lambda0_override: Optional[float] = attr.ib(default=None)
    workers: Optional[int] = attr.ib(default=None)

    @property
    def is_scan(self) -> bool:
        """Whether the section asks for a scan instead of explicit rhos."""
        return self.scan_min is not None

    def __attrs_post_init__(self):
        scan_keys = (self.scan_min, self.scan_max, self.scan_n)
        has_scan = any(value is not None for value in scan_keys)
        if has_scan and not all(value is not None for value in scan_keys):
            raise ConfigError("[certify] a scan needs scan_min, scan_max and scan_n")
        if has_scan and self.rhos:
            raise ConfigError("[certify] give either rhos or a scan, not both")
        if not has_scan and not self.rhos:
            raise ConfigError("[certify] the rho list is empty")
        if has_scan and not 0 < self.scan_min < self.scan_max:
            raise ConfigError("[certify] a scan needs 0 < scan_min < scan_max")
        if has_scan and self.scan_n < 2:
            raise ConfigError("[certify] scan_n must be >= 2")
        if any(rho <= 0 for rho, _kind in self.rhos):
            raise ConfigError("[certify] every rho must be > 0")
        if self.workers is not None and self.workers < 1:
            raise ConfigError("[certify] workers must be >= 1")


@attr.s(kw_only=True, slots=True, frozen=True)
class SolveSection:
    """[solve]"""
    n_nodes: int = attr.ib(default=DEFAULT_N_NODES)
    tol: float = attr.ib(default=DEFAULT_TOL)
    max_iter: int = attr.ib(default=DEFAULT_MAX_ITER)
    u0_kind: str = attr.ib(default="constant")
    u0_value: float = attr.ib(default=0.0)

    def __attrs_post_init__(self):
        if self.n_nodes < MIN_VERIFY_NODES:
            raise ConfigError("[solve] n_nodes must be >= {}, got {}".format(
                MIN_VERIFY_NODES, self.n_nodes))
        if not self.tol > 0:
            raise ConfigError("[solve] tol must be > 0, got {}".format(self.tol))
        if self.max_iter < 1:
            raise ConfigError("[solve] max_iter must be >= 1, got {}".format(self.max_iter))
        if self.u0_kind not in ("constant", "oracle"):
            raise ConfigError("[solve] u0 must be constant:<value> or oracle:<sigma>")
        if self.u0_value < 0:
            raise ConfigError("[solve] u0 value must be >= 0, got {}".format(self.u0_value))


@attr.s(kw_only=True, slots=True, frozen=True)
class VerifySection:
    """[verify]"""
    solution: str = attr.ib()
    c: Optional[float] = attr.ib(default=None)


@attr.s(kw_only=True, slots=True, frozen=True)
class RunConfig:
    """Resolved configuration of one run."""
    problem: ProblemSection = attr.ib()
    functional: FunctionalSection = attr.ib()
    f: Optional[NonlinearitySection] = attr.ib(default=None)
    certify: Optional[CertifySection] = attr.ib(default=None)
    solve: Optional[SolveSection] = attr.ib(default=None)
    verify: Optional[VerifySection] = attr.ib(default=None)
    base_dir: str = attr.ib(default=".")

    def require(self, section: str):
        """The section named `section`, or ConfigError if it was not given."""
        value = getattr(self, section)
        if value is None:
            raise ConfigError("config has no [{}] section".format(section))
        return value

    def as_dict(self) -> Dict[str, Any]:
        """Plain dict of the resolved values (for embedding in reports)."""
        return attr.asdict(
            self, filter=lambda attribute, _value: attribute.name != "base_dir")

    def resolve_path(self, path: str) -> str:
        """`path` relative to the config file directory."""
        return path if os.path.isabs(path) else os.path.join(self.base_dir, path)


def _problem_section(parser: configparser.ConfigParser) -> Tuple[ProblemSection, Dict]:
    if not parser.has_section("problem"):
        raise ConfigError("config has no [problem] section")
    section = parser["problem"]
    preset_name = section.get("preset")
    preset: Dict = {"problem": {}, "functional": {}}
    if preset_name is not None:
        if preset_name not in PRESETS:
            raise ConfigError("unknown preset '{}' (known: {})".format(
                preset_name, ", ".join(sorted(PRESETS))))
        preset = PRESETS[preset_name]
    values = {}
    for key in ("alpha", "beta", "eta"):
        if key in section:
            values[key] = _float("problem", key, section[key])
        elif key in preset["problem"]:
            values[key] = preset["problem"][key]
        else:
            raise ConfigError("[problem] missing '{}'".format(key))
    return ProblemSection(preset=preset_name, **values), preset["functional"]


def _functional_section(parser, preset_functional: Dict) -> FunctionalSection:
    section = parser["functional"] if parser.has_section("functional") else {}
    lambda0 = preset_functional.get("lambda0", 0.0)
    atoms = tuple(preset_functional.get("atoms", ()))
    if "lambda0" in section:
        lambda0 = _float("functional", "lambda0", section["lambda0"])
    if "atoms" in section:
        atoms = str_to_atoms(section["atoms"])
    return FunctionalSection(
        lambda0=lambda0, atoms=atoms, density=section.get("density"))


def _f_section(parser) -> Optional[NonlinearitySection]:
    if not parser.has_section("f"):
        return None
    section = parser["f"]
    return NonlinearitySection(
        expr=section.get("expr"),
        builtin=section.get("builtin"),
        params=str_to_params(section.get("params", "")),
    )


def _certify_section(parser) -> Optional[CertifySection]:
    if not parser.has_section("certify"):
        return None
    section = parser["certify"]

    def _opt(key, convert):
        return convert("certify", key, section[key]) if key in section else None

    return CertifySection(
        rhos=str_to_rho_requests(section.get("rhos", "")),
        scan_min=_opt("scan_min", _float),
        scan_max=_opt("scan_max", _float),
        scan_n=_opt("scan_n", _int),
        lambda0_override=_opt("lambda0_override", _float),
        workers=_opt("workers", _int),
    )


def _solve_section(parser) -> Optional[SolveSection]:
    if not parser.has_section("solve"):
        return None
    section = parser["solve"]
    u0_kind, u0_value = _pair("solve", "u0", section.get("u0", "constant:0"))
    return SolveSection(
        n_nodes=_int("solve", "n_nodes", section.get("n_nodes", str(DEFAULT_N_NODES))),
        tol=_float("solve", "tol", section.get("tol", repr(DEFAULT_TOL))),
        max_iter=_int("solve", "max_iter", section.get("max_iter", str(DEFAULT_MAX_ITER))),
        u0_kind=u0_kind,
        u0_value=_float("solve", "u0", u0_value),
    )


def _verify_section(parser) -> Optional[VerifySection]:
    if not parser.has_section("verify"):
        return None
    section = parser["verify"]
    if "solution" not in section:
        raise ConfigError("[verify] missing 'solution'")
    c = _float("verify", "c", section["c"]) if "c" in section else None
    return VerifySection(solution=section["solution"], c=c)


def parse_config(text: str, base_dir: str = ".") -> RunConfig:
    """Parse config `text`; relative paths in it are taken from `base_dir`.

    Raises:
        ConfigError: on syntax errors, unknown sections, missing keys or
            values of the wrong type.
    """
    parser = configparser.ConfigParser(
        inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("cannot parse config: {}".format(exc))
    unknown = sorted(set(parser.sections()) - set(SECTIONS))
    if unknown:
        raise ConfigError("unknown config section(s): {}".format(", ".join(unknown)))
    problem, preset_functional = _problem_section(parser)
    config = RunConfig(
        problem=problem,
        functional=_functional_section(parser, preset_functional),
        f=_f_section(parser),
        certify=_certify_section(parser),
        solve=_solve_section(parser),
        verify=_verify_section(parser),
        base_dir=base_dir,
    )
    LOGGER.debug("resolved config: %s", config)
    return config


def load_config(path: str) -> RunConfig:
    """Read and parse the config file at `path`."""
    try:
        with open(path, encoding="utf-8") as config_file:
            text = config_file.read()
    except OSError as exc:
        raise ConfigError("cannot read config '{}': {}".format(path, exc))
    return parse_config(text, base_dir=os.path.dirname(os.path.abspath(path)))


def read_table(path: str, columns: Tuple[str, str]) -> GridFunction:
    """Two-column CSV (with header `columns`) as a :class:`GridFunction`."""
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (OSError, ValueError) as exc:
        raise ConfigError("cannot read table '{}': {}".format(path, exc))
    missing = [column for column in columns if column not in frame.columns]
    if missing:
        raise ConfigError("table '{}' lacks column(s) {}".format(path, missing))
    try:
        return GridFunction(
            nodes=frame[columns[0]].to_numpy(dtype=float),
            values=frame[columns[1]].to_numpy(dtype=float))
    except DomainError as exc:
        raise ConfigError("table '{}': {}".format(path, exc))


def build_params(config: RunConfig) -> model.ProblemParams:
    """ProblemParams from [problem]; invalid values are config errors."""
    try:
        return model.ProblemParams(
            alpha=config.problem.alpha, beta=config.problem.beta, eta=config.problem.eta)
    except DomainError as exc:
        raise ConfigError("[problem] {}".format(exc))


def build_functional(config: RunConfig) -> model.StieltjesFunctional:
    """StieltjesFunctional from [functional]."""
    section = config.functional
    density = None
    if section.density is not None:
        density = read_table(config.resolve_path(section.density), ("t", "w"))
    try:
        return model.StieltjesFunctional(
            lambda0=section.lambda0, atoms=section.atoms, density=density)
    except DomainError as exc:
        raise ConfigError("[functional] {}".format(exc))


def _knots(text: str) -> List[Tuple[float, float]]:
    return [
        tuple(_float("f", "knots", part) for part in _pair("f", "knots", item))
        for item in text.split()
    ]


def build_nonlinearity(config: RunConfig) -> model.Nonlinearity:
    """Nonlinearity from [f]; expression errors propagate unchanged."""
    section = config.require("f")
    if section.expr is not None:
        return model.Nonlinearity.from_expression(section.expr)
    params: Dict[str, Any] = {}
    for key, value in section.params.items():
        params[key] = _knots(value) if key == "knots" else _float("f", key, value)
    try:
        return model.BUILTINS[section.builtin](**params)
    except TypeError as exc:
        raise ConfigError("[f] bad params for builtin '{}': {}".format(
            section.builtin, exc))
    except DomainError as exc:
        raise ConfigError("[f] {}".format(exc))
