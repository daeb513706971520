"""Continuous model layer.

Double-well potentials, the interpolated reaction source, mobility,
derived sharp-interface constants and the leading-order interface
profile.  Everything here is a pure function over immutable parameter
objects; all evaluators accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import ConfigurationError

SQRT2 = math.sqrt(2.0)

#: Surface-tension constant of the quartic double well, 2*sqrt(2)/3.
GAMMA_QUARTIC = 2.0 * SQRT2 / 3.0


# ---------------------------------------------------------------------------
# parameter objects
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DoubleWellPotential:
    """Even double-well energy density with minima at +-1.

    ``psi``, ``dpsi`` and ``ddpsi`` must be vectorized (numpy-compatible)
    callables.  Custom potentials must supply the curvatures at the wells
    explicitly; no symbolic differentiation is attempted.
    """

    psi: Callable
    dpsi: Callable
    ddpsi: Callable
    ddpsi_plus: float
    ddpsi_minus: float
    kind: str = "custom"

    def __post_init__(self):
        if self.ddpsi_plus == 0.0 or self.ddpsi_minus == 0.0:
            raise ConfigurationError("double-well curvature at the wells must be nonzero")

    @classmethod
    def quartic(cls) -> "DoubleWellPotential":
        """The standard quartic well psi(r) = (1 - r^2)^2 / 4."""
        return cls(
            psi=lambda r: 0.25 * (1.0 - np.asarray(r) ** 2) ** 2,
            dpsi=lambda r: np.asarray(r) ** 3 - np.asarray(r),
            ddpsi=lambda r: 3.0 * np.asarray(r) ** 2 - 1.0,
            ddpsi_plus=2.0,
            ddpsi_minus=2.0,
            kind="quartic",
        )


@dataclass(frozen=True)
class ReactionSpec:
    """Bulk rates S+-, relaxation coefficients K+-, interface production L.

    ``r_c`` is the crossover threshold between the interpolated interior
    of the source and its affine exterior branches.
    """

    s_plus: float
    s_minus: float
    k_plus: float
    k_minus: float
    l_coef: float = 0.0
    r_c: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.r_c <= 1.0):
            raise ConfigurationError(f"r_c must lie in (0, 1], got {self.r_c}")


@dataclass(frozen=True)
class MobilitySpec:
    """Phase mobilities, interpolated affinely in phi and clamped."""

    m_plus: float
    m_minus: float

    def __post_init__(self):
        if self.m_plus <= 0.0 or self.m_minus <= 0.0:
            raise ConfigurationError("mobilities must be positive")


@dataclass(frozen=True)
class PhaseFieldParams:
    """Full parameter set of the diffuse-interface equations."""

    beta: float
    epsilon: float
    potential: DoubleWellPotential
    reaction: ReactionSpec
    mobility: MobilitySpec

    def __post_init__(self):
        if self.beta <= 0.0:
            raise ConfigurationError(f"beta must be positive, got {self.beta}")
        if self.epsilon <= 0.0:
            raise ConfigurationError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class SharpParams:
    """Constants of the sharp-interface limit on a planar box.

    ``d_plus``/``d_minus`` are ``None`` when the corresponding ``rho`` is
    zero; ``lambda`` entries are ``None`` unless ``rho > 0``.  Planar
    operations reject such configurations.
    """

    rho_plus: float
    rho_minus: float
    d_plus: float | None
    d_minus: float | None
    lambda_plus: float | None
    lambda_minus: float | None
    gamma: float
    s_interface: float
    length_L: float
    width_Lt: float

    @property
    def m_plus(self) -> float:
        self.require_planar()
        return self.rho_plus / self.lambda_plus**2

    @property
    def m_minus(self) -> float:
        self.require_planar()
        return self.rho_minus / self.lambda_minus**2

    @property
    def s_plus(self) -> float:
        self.require_planar()
        return self.d_plus * self.rho_plus

    @property
    def s_minus(self) -> float:
        self.require_planar()
        return self.d_minus * self.rho_minus

    def require_planar(self):
        """Raise unless rho+- > 0 (needed by every planar formula)."""
        if self.rho_plus <= 0.0 or self.rho_minus <= 0.0:
            raise ConfigurationError(
                "planar sharp-interface formulas require rho_plus > 0 and rho_minus > 0; "
                f"got rho_plus={self.rho_plus}, rho_minus={self.rho_minus}"
            )
        if self.lambda_plus is None or self.lambda_minus is None:
            raise ConfigurationError("lambda_plus/lambda_minus undefined for this configuration")


@dataclass(frozen=True)
class NondimReport:
    """Characteristic scales and dimensionless groups of a configuration."""

    x_tilde: float
    mu_tilde: float
    t_tilde: float
    c_l: float
    beta_star: float
    m_star: float
    s_star: float
    rho_star: float
    s_i_star: float


# ---------------------------------------------------------------------------
# potential and interpolation functions
# ---------------------------------------------------------------------------

def eval_potential(pot: DoubleWellPotential, r):
    """Evaluate (psi, psi', psi'') at ``r``."""
    return pot.psi(r), pot.dpsi(r), pot.ddpsi(r)


def _g1_hat(s):
    return 0.75 * (s + 1.0) ** 2 - 0.25 * (s + 1.0) ** 3


def _g2_hat(s, pot: DoubleWellPotential):
    root = np.sqrt(np.maximum(2.0 * pot.psi(s), 0.0))
    return -0.5 / math.sqrt(pot.ddpsi_minus) * (s - 1.0) * root


def _g4_hat(s, pot: DoubleWellPotential):
    return 2.0 * pot.psi(s)


def _g_scaled(k: int, r, r_c: float, pot: DoubleWellPotential):
    """G_k on [-r_c, r_c] via the rescaled hat functions (no domain check)."""
    s = np.clip(np.asarray(r, dtype=float) / r_c, -1.0, 1.0)
    if k == 1:
        return _g1_hat(s)
    if k == 2:
        return r_c * _g2_hat(s, pot)
    if k == 3:
        return -r_c * _g2_hat(-s, pot)
    if k == 4:
        return _g4_hat(s, pot)
    raise ValueError(f"interpolation index must be 1..4, got {k}")


def interp_G(k: int, r: float, r_c: float, pot: DoubleWellPotential) -> float:
    """Interpolation function G_k(r) for r in [-r_c, r_c].

    Raises ``ValueError`` outside the interpolation interval.
    """
    if not (0.0 < r_c <= 1.0):
        raise ConfigurationError(f"r_c must lie in (0, 1], got {r_c}")
    if abs(r) > r_c:
        raise ValueError(f"G_{k} is defined on [-r_c, r_c]; got r={r}, r_c={r_c}")
    return float(_g_scaled(k, r, r_c, pot))


# ---------------------------------------------------------------------------
# reaction source
# ---------------------------------------------------------------------------

def source_S1(spec: ReactionSpec, pot: DoubleWellPotential, r):
    """Slow source term: interpolates S- to S+ across the interface."""
    r = np.asarray(r, dtype=float)
    interior = spec.s_minus + _g_scaled(1, r, spec.r_c, pot) * (spec.s_plus - spec.s_minus)
    out = np.where(r >= spec.r_c, spec.s_plus, np.where(r <= -spec.r_c, spec.s_minus, interior))
    return out if out.ndim else float(out)


def source_S2(spec: ReactionSpec, pot: DoubleWellPotential, r):
    """Fast source term: affine relaxation outside, C^1 interpolation inside."""
    r = np.asarray(r, dtype=float)
    rc = spec.r_c
    g1 = _g_scaled(1, r, rc, pot)
    s2_hat = (
        -spec.k_minus * _g_scaled(2, r, rc, pot)
        - spec.k_plus * _g_scaled(3, r, rc, pot)
        + spec.l_coef * _g_scaled(4, r, rc, pot)
        - spec.k_plus * (rc - 1.0) * g1
        - spec.k_minus * (1.0 - rc) * (1.0 - g1)
    )
    out = np.where(
        r >= rc,
        -spec.k_plus * (r - 1.0),
        np.where(r <= -rc, -spec.k_minus * (r + 1.0), s2_hat),
    )
    return out if out.ndim else float(out)


def source_S(spec: ReactionSpec, pot: DoubleWellPotential, epsilon: float, r):
    """Composed source S_eps(r) = S1(r) + S2(r)/eps."""
    return source_S1(spec, pot, r) + source_S2(spec, pot, r) / epsilon


# ---------------------------------------------------------------------------
# mobility
# ---------------------------------------------------------------------------

def mobility_m(spec: MobilitySpec, r):
    """Affine-clamped mobility with m(+-1) = m_+-."""
    w = np.clip((1.0 + np.asarray(r, dtype=float)) / 2.0, 0.0, 1.0)
    out = spec.m_minus + (spec.m_plus - spec.m_minus) * w
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# interface profile and quadratures
# ---------------------------------------------------------------------------

def profile_Phi0(pot: DoubleWellPotential, z):
    """Leading-order interface profile.

    Quartic: tanh(z/sqrt(2)) in closed form.  Custom potentials: integrate
    the first-order reduction Phi' = sqrt(2 psi(Phi)), Phi(0) = 0, and use
    oddness for z < 0.
    """
    z_arr = np.asarray(z, dtype=float)
    if pot.kind == "quartic":
        out = np.tanh(z_arr / SQRT2)
        return out if out.ndim else float(out)

    zmax = float(np.max(np.abs(z_arr))) if z_arr.size else 0.0
    if zmax == 0.0:
        out = np.zeros_like(z_arr)
        return out if out.ndim else 0.0

    def rhs(_z, y):
        return [math.sqrt(max(2.0 * float(pot.psi(min(y[0], 1.0))), 0.0))]

    sol = integrate.solve_ivp(
        rhs, (0.0, zmax), [0.0], dense_output=True, rtol=1e-10, atol=1e-12, max_step=0.1
    )
    out = np.sign(z_arr) * np.minimum(sol.sol(np.abs(z_arr))[0], 1.0)
    return out if out.ndim else float(out)


def gamma_quadrature(pot: DoubleWellPotential, abs_tol: float = 1e-10) -> float:
    """Surface-tension constant: integral of sqrt(2 psi) over [-1, 1]."""
    val, _ = integrate.quad(
        lambda s: math.sqrt(max(2.0 * float(pot.psi(s)), 0.0)),
        -1.0, 1.0, epsabs=abs_tol, epsrel=1e-12, limit=200,
    )
    return val


#: Half-width of the profile quadrature window; the quartic profile is
#: within 1e-17 of its limits there, so truncation is below any tolerance
#: used in this module.
_PROFILE_Z_MAX = 40.0 * SQRT2


def si_quadrature(spec: ReactionSpec, pot: DoubleWellPotential, abs_tol: float = 1e-10) -> float:
    """Net interfacial reaction constant: integral of S2 along the profile.

    Valid for any r_c in (0, 1]; for r_c < 1 the fast source switches to its
    affine branches where |Phi0| >= r_c, so the branch points are passed to
    the quadrature as known kinks.
    """
    zmax = _PROFILE_Z_MAX

    def integrand(zz):
        return float(source_S2(spec, pot, profile_Phi0(pot, zz)))

    points = None
    if spec.r_c < 1.0 and pot.kind == "quartic":
        z_c = SQRT2 * math.atanh(spec.r_c)
        points = [-z_c, z_c]
    val, _ = integrate.quad(
        integrand, -zmax, zmax, epsabs=abs_tol, epsrel=1e-12, limit=400, points=points
    )
    return val


def si_closed_form(spec: ReactionSpec, pot: DoubleWellPotential) -> float:
    """Closed form of the interfacial reaction constant (requires r_c = 1)."""
    if spec.r_c != 1.0:
        raise ConfigurationError("closed-form S_I is only available for r_c = 1")
    gamma = GAMMA_QUARTIC if pot.kind == "quartic" else gamma_quadrature(pot)
    return (spec.k_plus - spec.k_minus) / math.sqrt(pot.ddpsi_minus) + gamma * spec.l_coef


# ---------------------------------------------------------------------------
# derived sharp-interface constants
# ---------------------------------------------------------------------------

def derive_sharp_params(p: PhaseFieldParams, length_L: float, width_Lt: float) -> SharpParams:
    """Compute the sharp-interface constants implied by ``p``.

    ``d_+-`` is reported as ``None`` (not zero) when ``rho_+- = 0``; the
    planar module rejects such configurations since its formulas divide
    by ``rho``.
    """
    pot = p.potential
    rho_plus = p.reaction.k_plus / (p.beta * pot.ddpsi_plus)
    rho_minus = p.reaction.k_minus / (p.beta * pot.ddpsi_minus)
    d_plus = p.reaction.s_plus / rho_plus if rho_plus != 0.0 else None
    d_minus = p.reaction.s_minus / rho_minus if rho_minus != 0.0 else None
    lam_plus = math.sqrt(rho_plus / p.mobility.m_plus) if rho_plus > 0.0 else None
    lam_minus = math.sqrt(rho_minus / p.mobility.m_minus) if rho_minus > 0.0 else None
    gamma = GAMMA_QUARTIC if pot.kind == "quartic" else gamma_quadrature(pot)
    if p.reaction.r_c == 1.0:
        s_interface = si_closed_form(p.reaction, pot)
    else:
        s_interface = si_quadrature(p.reaction, pot)
    return SharpParams(
        rho_plus=rho_plus,
        rho_minus=rho_minus,
        d_plus=d_plus,
        d_minus=d_minus,
        lambda_plus=lam_plus,
        lambda_minus=lam_minus,
        gamma=gamma,
        s_interface=s_interface,
        length_L=length_L,
        width_Lt=width_Lt,
    )


def nondimensionalize(p: PhaseFieldParams, sharp: SharpParams) -> NondimReport:
    """Characteristic scales built from the minus-phase quantities."""
    rho_minus = sharp.rho_minus
    s_minus = p.reaction.s_minus
    if rho_minus <= 0.0 or s_minus <= 0.0:
        raise ConfigurationError(
            "nondimensionalization requires rho_minus > 0 and S_minus > 0; "
            f"got rho_minus={rho_minus}, S_minus={s_minus}"
        )
    m_minus = p.mobility.m_minus
    x_tilde = math.sqrt(m_minus / rho_minus)
    mu_tilde = s_minus / rho_minus
    t_tilde = 1.0 / s_minus
    c_l = p.beta * rho_minus / s_minus
    beta_star = p.beta * rho_minus**1.5 / (math.sqrt(m_minus) * s_minus)
    return NondimReport(
        x_tilde=x_tilde,
        mu_tilde=mu_tilde,
        t_tilde=t_tilde,
        c_l=c_l,
        beta_star=beta_star,
        m_star=p.mobility.m_plus / m_minus,
        s_star=p.reaction.s_plus / s_minus,
        rho_star=sharp.rho_plus / rho_minus,
        s_i_star=sharp.s_interface * math.sqrt(rho_minus / m_minus) / s_minus,
    )


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def validate_potential(pot: DoubleWellPotential, n_samples: int = 257, tol: float = 1e-12):
    """Numerically check the standing assumptions on a double well.

    Returns a list of violation messages (empty when the potential passes).
    The tolerance applies to the quartic; custom potentials evaluated
    through the same checks may need a looser one.
    """
    problems = []
    r = np.linspace(-1.5, 1.5, n_samples)
    psi = np.asarray(pot.psi(r), dtype=float)
    if np.any(psi < -tol):
        problems.append("psi takes negative values")
    if np.max(np.abs(psi - np.asarray(pot.psi(-r)))) > tol:
        problems.append("psi is not even")
    for point, value in (("psi(1)", pot.psi(1.0)), ("psi(-1)", pot.psi(-1.0)),
                         ("psi'(1)", pot.dpsi(1.0)), ("psi'(-1)", pot.dpsi(-1.0)),
                         ("psi'(0)", pot.dpsi(0.0))):
        if abs(float(value)) > tol:
            problems.append(f"{point} = {float(value):.3e}, expected 0")
    for label, stored, point in (("psi''(+1)", pot.ddpsi_plus, 1.0),
                                 ("psi''(-1)", pot.ddpsi_minus, -1.0)):
        if abs(float(pot.ddpsi(point)) - stored) > max(tol, 1e-10 * abs(stored)):
            problems.append(f"{label} evaluator disagrees with stored value")
    # second-order finite-difference consistency of the derivative evaluators
    h = 1e-5
    rr = np.linspace(-1.2, 1.2, 25)
    fd1 = (np.asarray(pot.psi(rr + h)) - np.asarray(pot.psi(rr - h))) / (2 * h)
    if np.max(np.abs(fd1 - np.asarray(pot.dpsi(rr)))) > 1e-8:
        problems.append("dpsi inconsistent with finite differences of psi")
    fd2 = (np.asarray(pot.dpsi(rr + h)) - np.asarray(pot.dpsi(rr - h))) / (2 * h)
    if np.max(np.abs(fd2 - np.asarray(pot.ddpsi(rr)))) > 1e-8:
        problems.append("ddpsi inconsistent with finite differences of dpsi")
    return problems
