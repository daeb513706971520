"""Run configuration: a flat INI-style document with typed sections.

Sections: [domain], [discretization], [physics], [initial], [output],
plus [converge] for ladder studies.  Exactly one of the rho pair or the
K pair may be given; the other is derived through rho = K / (beta psi''),
with defaults m = rho = r_c = 1 and L = 0.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from typing import Any

from .errors import ConfigurationError
from .model import (
    DoubleWellPotential,
    MobilitySpec,
    PhaseFieldParams,
    ReactionSpec,
)

_EPS_SYMBOLIC = re.compile(r"^\s*1\s*/\s*\(\s*([0-9]*\.?[0-9]+)\s*\*\s*pi\s*\)\s*$")


def parse_epsilon(text: str) -> float:
    """Accepts a float literal or the symbolic form '1/(k*pi)'."""
    match = _EPS_SYMBOLIC.match(text)
    if match:
        return 1.0 / (float(match.group(1)) * math.pi)
    try:
        return float(text)
    except ValueError:
        raise ConfigurationError(f"cannot parse epsilon value {text!r}") from None


def _parse_scalar(text: str) -> Any:
    text = text.strip()
    lowered = text.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    if _EPS_SYMBOLIC.match(text):
        return parse_epsilon(text)
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def _parse_value(text: str) -> Any:
    """Scalar, comma-separated tuple, or semicolon-separated tuple list."""
    if ";" in text:
        return [_parse_value(part) for part in text.split(";") if part.strip()]
    if "," in text:
        return tuple(_parse_scalar(part) for part in text.split(",") if part.strip())
    return _parse_scalar(text)


@dataclass
class RunConfig:
    """Fully resolved configuration (all defaults expanded)."""

    dim: int
    lengths: tuple[float, ...]
    epsilon: float
    h: float | None
    tau: float
    t_end: float
    beta: float
    s_plus: float
    s_minus: float
    rho_plus: float
    rho_minus: float
    k_plus: float
    k_minus: float
    l_coef: float
    r_c: float
    m_plus: float
    m_minus: float
    potential: str
    init_kind: str
    init_params: dict
    seed: int
    directory: str | None
    stride: int
    vtk: bool
    checkpoint: bool
    track_line: float
    modes_lmax: int | None
    converge_epsilons: list[float] = field(default_factory=list)
    converge_dim: int = 1

    def make_potential(self) -> DoubleWellPotential:
        if self.potential == "quartic":
            return DoubleWellPotential.quartic()
        raise ConfigurationError(
            f"potential kind {self.potential!r} is not available from configuration; "
            "custom potentials are a library-level feature")

    def phase_field_params(self) -> PhaseFieldParams:
        return PhaseFieldParams(
            beta=self.beta,
            epsilon=self.epsilon,
            potential=self.make_potential(),
            reaction=ReactionSpec(self.s_plus, self.s_minus, self.k_plus,
                                  self.k_minus, self.l_coef, self.r_c),
            mobility=MobilitySpec(self.m_plus, self.m_minus),
        )

    def mesh_size(self) -> float:
        from .analysis import auto_mesh_size

        return self.h if self.h is not None else auto_mesh_size(self.epsilon)

    def as_manifest_dict(self) -> dict:
        out = {}
        for key, value in self.__dict__.items():
            out[key] = list(value) if isinstance(value, tuple) else value
        return out


_KNOWN = {
    "domain": {"dim", "lengths"},
    "discretization": {"epsilon", "h", "tau", "t_end"},
    "physics": {"beta", "s_plus", "s_minus", "rho_plus", "rho_minus", "k_plus",
                "k_minus", "l_coef", "r_c", "m_plus", "m_minus", "potential"},
    "output": {"directory", "stride", "vtk", "checkpoint", "track_line",
               "modes_lmax", "seed"},
    "converge": {"epsilons", "dim"},
}


def _get(sections: dict, section: str, key: str, default=None, required=False):
    value = sections.get(section, {}).get(key)
    if value is None:
        if required:
            raise ConfigurationError(f"[{section}] {key}: required field is missing")
        return default
    return value


def parse_config(text: str, overrides: dict[str, str] | None = None) -> RunConfig:
    """Parse and validate a configuration document.

    ``overrides`` maps dotted 'section.key' names to raw string values and
    wins over the file (the CLI's flag-over-file rule).
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed configuration: {exc}") from None

    sections: dict[str, dict[str, Any]] = {}
    for section in parser.sections():
        name = section.lower()
        sections[name] = {}
        for key, raw in parser.items(section):
            sections[name][key.lower()] = raw
    for dotted, raw in (overrides or {}).items():
        if "." not in dotted:
            raise ConfigurationError(f"override {dotted!r} must be 'section.key'")
        sec, key = dotted.lower().split(".", 1)
        sections.setdefault(sec, {})[key] = raw

    for section, keys in sections.items():
        if section == "initial":
            continue
        if section not in _KNOWN:
            raise ConfigurationError(f"unknown configuration section [{section}]")
        for key in keys:
            if key not in _KNOWN[section]:
                raise ConfigurationError(f"[{section}] {key}: unknown field")

    dim = int(_parse_scalar(_get(sections, "domain", "dim", "1")))
    if dim not in (1, 2):
        raise ConfigurationError(f"[domain] dim: must be 1 or 2, got {dim}")
    raw_lengths = _get(sections, "domain", "lengths", "1")
    lengths = _parse_value(raw_lengths)
    if not isinstance(lengths, tuple):
        lengths = (lengths,)
    lengths = tuple(float(x) for x in lengths)
    if len(lengths) == 1 and dim == 2:
        lengths = (lengths[0], lengths[0])
    if len(lengths) != dim:
        raise ConfigurationError(f"[domain] lengths: expected {dim} entries, got {lengths}")

    epsilon = parse_epsilon(_get(sections, "discretization", "epsilon", required=True))
    h_raw = _get(sections, "discretization", "h")
    h = float(_parse_scalar(h_raw)) if h_raw is not None else None
    tau = float(_parse_scalar(_get(sections, "discretization", "tau", "1e-3")))
    t_end = float(_parse_scalar(_get(sections, "discretization", "t_end", "1.0")))

    phys = sections.get("physics", {})
    beta = float(_parse_scalar(_get(sections, "physics", "beta", required=True)))
    s_plus = float(_parse_scalar(_get(sections, "physics", "s_plus", required=True)))
    s_minus = float(_parse_scalar(_get(sections, "physics", "s_minus", required=True)))
    potential = str(_get(sections, "physics", "potential", "quartic")).strip()
    if potential != "quartic":
        raise ConfigurationError(f"[physics] potential: unsupported kind {potential!r}")
    pot = DoubleWellPotential.quartic()

    has_rho = "rho_plus" in phys or "rho_minus" in phys
    has_k = "k_plus" in phys or "k_minus" in phys
    if has_rho and has_k:
        raise ConfigurationError(
            "[physics]: give either rho_plus/rho_minus or k_plus/k_minus, not both")
    if has_k:
        k_plus = float(_parse_scalar(_get(sections, "physics", "k_plus", "0")))
        k_minus = float(_parse_scalar(_get(sections, "physics", "k_minus", "0")))
        rho_plus = k_plus / (beta * pot.ddpsi_plus)
        rho_minus = k_minus / (beta * pot.ddpsi_minus)
    else:
        rho_plus = float(_parse_scalar(_get(sections, "physics", "rho_plus", "1")))
        rho_minus = float(_parse_scalar(_get(sections, "physics", "rho_minus", "1")))
        k_plus = beta * pot.ddpsi_plus * rho_plus
        k_minus = beta * pot.ddpsi_minus * rho_minus
    l_coef = float(_parse_scalar(_get(sections, "physics", "l_coef", "0")))
    r_c = float(_parse_scalar(_get(sections, "physics", "r_c", "1")))
    m_plus = float(_parse_scalar(_get(sections, "physics", "m_plus", "1")))
    m_minus = float(_parse_scalar(_get(sections, "physics", "m_minus", "1")))

    init = dict(sections.get("initial", {}))
    init_kind = str(init.pop("kind", "")).strip()
    if not init_kind:
        raise ConfigurationError("[initial] kind: required field is missing")
    init_params = {key: _parse_value(raw) for key, raw in init.items()}

    seed = int(_parse_scalar(_get(sections, "output", "seed", "0")))
    directory = _get(sections, "output", "directory")
    stride = int(_parse_scalar(_get(sections, "output", "stride", "10")))
    vtk = bool(_parse_scalar(_get(sections, "output", "vtk", "true")))
    checkpoint = bool(_parse_scalar(_get(sections, "output", "checkpoint", "true")))
    track_line = float(_parse_scalar(_get(sections, "output", "track_line", "0")))
    lmax_raw = _get(sections, "output", "modes_lmax")
    modes_lmax = int(_parse_scalar(lmax_raw)) if lmax_raw is not None else None

    conv_raw = _get(sections, "converge", "epsilons")
    if conv_raw is not None:
        parsed = _parse_value(conv_raw)
        if not isinstance(parsed, tuple):
            parsed = (parsed,)
        converge_epsilons = [parse_epsilon(str(p)) if isinstance(p, str) else float(p)
                             for p in parsed]
    else:
        converge_epsilons = []
    converge_dim = int(_parse_scalar(_get(sections, "converge", "dim", "1")))

    cfg = RunConfig(
        dim=dim, lengths=lengths, epsilon=epsilon, h=h, tau=tau, t_end=t_end,
        beta=beta, s_plus=s_plus, s_minus=s_minus,
        rho_plus=rho_plus, rho_minus=rho_minus, k_plus=k_plus, k_minus=k_minus,
        l_coef=l_coef, r_c=r_c, m_plus=m_plus, m_minus=m_minus,
        potential=potential, init_kind=init_kind, init_params=init_params,
        seed=seed, directory=directory, stride=stride, vtk=vtk,
        checkpoint=checkpoint, track_line=track_line, modes_lmax=modes_lmax,
        converge_epsilons=converge_epsilons, converge_dim=converge_dim,
    )
    cfg.phase_field_params()  # validate physics eagerly
    if "seed" not in init_params and init_kind in ("random_spinodal", "flat_front"):
        init_params.setdefault("seed", seed)
    return cfg
