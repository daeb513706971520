"""Sharp-interface engine for the planar front geometry.

Closed-form chemical potentials on both sides of a flat front, the
interface-position ODE, stationary-front root finding and the linear
stability (transverse-mode amplification) analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .model import SharpParams

_NORMALIZED_TOL = 1e-12


@dataclass(frozen=True)
class PlanarConfig:
    """Planar front problem: sharp constants, initial position, ODE stepping."""

    sharp: SharpParams
    q0: float
    dt: float = 1e-4
    t_end: float = 1.0

    def __post_init__(self):
        self.sharp.require_planar()
        if not (0.0 < self.q0 < self.sharp.length_L):
            raise ConfigurationError(
                f"q0 must lie in (0, {self.sharp.length_L}), got {self.q0}")
        if self.dt <= 0.0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")


@dataclass(frozen=True)
class ModeIndex:
    """Transverse mode multi-index l_hat in N_0^(d-1)."""

    l_vec: tuple[int, ...]
    l_sq: int

    def __post_init__(self):
        if any(l < 0 for l in self.l_vec):
            raise ConfigurationError(f"mode entries must be nonnegative, got {self.l_vec}")
        if self.l_sq != sum(l * l for l in self.l_vec):
            raise ConfigurationError(
                f"l_sq={self.l_sq} does not match |{self.l_vec}|^2={sum(l*l for l in self.l_vec)}")

    @classmethod
    def of(cls, *l_vec: int) -> "ModeIndex":
        return cls(tuple(int(l) for l in l_vec), sum(int(l) ** 2 for l in l_vec))


@dataclass(frozen=True)
class StabilityRow:
    """One mode's amplification data at a frozen front position."""

    mode: ModeIndex
    gamma_plus: float
    gamma_minus: float
    a_plus: float
    a_minus: float
    factor: float
    beta_crit: float | None = None

    @property
    def growth_rate(self) -> float:
        """Exponential rate of the perturbation amplitude (factor / 2)."""
        return 0.5 * self.factor


# ---------------------------------------------------------------------------
# chemical potentials and front velocity
# ---------------------------------------------------------------------------

def mu_planar(cfg: PlanarConfig, side: str, q: float, z) -> float:
    """Quasi-static chemical potential at depth ``z`` for front position ``q``.

    ``side`` is "+" (valid for z in [0, q]) or "-" (valid for z in [q, L]).
    """
    sharp = cfg.sharp
    L = sharp.length_L
    if not (0.0 < q < L):
        raise ValueError(f"front position must lie in (0, {L}), got {q}")
    z_arr = np.asarray(z, dtype=float)
    if side == "+":
        if np.any(z_arr < 0.0) or np.any(z_arr > q):
            raise ValueError(f"mu_plus is defined on [0, q]=[0, {q}]")
        out = sharp.d_plus * (1.0 - np.cosh(sharp.lambda_plus * z_arr)
                              / math.cosh(sharp.lambda_plus * q))
    elif side == "-":
        if np.any(z_arr < q) or np.any(z_arr > L):
            raise ValueError(f"mu_minus is defined on [q, L]=[{q}, {L}]")
        out = sharp.d_minus * (1.0 - np.cosh(sharp.lambda_minus * (L - z_arr))
                               / math.cosh(sharp.lambda_minus * (L - q)))
    else:
        raise ValueError(f"side must be '+' or '-', got {side!r}")
    return out if out.ndim else float(out)


def _velocity(sharp: SharpParams, q: float) -> float:
    return 0.5 * (
        sharp.d_plus * sharp.m_plus * sharp.lambda_plus
        * math.tanh(sharp.lambda_plus * q)
        + sharp.d_minus * sharp.m_minus * sharp.lambda_minus
        * math.tanh(sharp.lambda_minus * (sharp.length_L - q))
        + sharp.s_interface
    )


def velocity_H(cfg: PlanarConfig, q: float) -> float:
    """Right-hand side of the front ODE dq/dt = H(q)."""
    if not (0.0 < q < cfg.sharp.length_L):
        raise ValueError(f"front position must lie in (0, {cfg.sharp.length_L}), got {q}")
    return _velocity(cfg.sharp, q)


def find_stationary(cfg: PlanarConfig, tol: float = 1e-12) -> float | None:
    """Root of H by bisection; ``None`` when no sign change exists."""
    L = cfg.sharp.length_L
    delta = 1e-12 * L
    lo, hi = delta, L - delta
    f_lo, f_hi = _velocity(cfg.sharp, lo), _velocity(cfg.sharp, hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0.0:
        return None
    best_q, best_f = lo, abs(f_lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = _velocity(cfg.sharp, mid)
        if abs(f_mid) < best_f:
            best_q, best_f = mid, abs(f_mid)
        if abs(f_mid) < tol:
            return mid
        if f_lo * f_mid <= 0.0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return best_q


@dataclass(frozen=True)
class PlanarTrajectory:
    """Front trajectory samples plus a domain-exit flag."""

    times: np.ndarray
    q: np.ndarray
    boundary_hit: bool = False

    def final(self) -> tuple[float, float]:
        return float(self.times[-1]), float(self.q[-1])


def integrate_q(cfg: PlanarConfig, output_stride: int = 1) -> PlanarTrajectory:
    """Integrate dq/dt = H(q) with the classical 4th-order one-step method.

    Samples the trajectory every ``output_stride`` steps (the final state is
    always included).  If any stage leaves (0, L) the integration stops and
    the trajectory is flagged instead of raising.
    """
    if output_stride < 1:
        raise ConfigurationError("output_stride must be >= 1")
    sharp = cfg.sharp
    L = sharp.length_L
    dt = cfg.dt
    n_steps = int(round(cfg.t_end / dt))
    if abs(n_steps * dt - cfg.t_end) > 1e-9 * max(1.0, abs(cfg.t_end)):
        raise ConfigurationError(
            f"t_end={cfg.t_end} is not an integer multiple of dt={dt}")

    times = [0.0]
    qs = [cfg.q0]
    q = cfg.q0
    hit = False
    for n in range(1, n_steps + 1):
        try:
            k1 = _velocity(sharp, q)
            k2 = _velocity(sharp, q + 0.5 * dt * k1)
            k3 = _velocity(sharp, q + 0.5 * dt * k2)
            k4 = _velocity(sharp, q + dt * k3)
        except (ValueError, OverflowError):
            hit = True
            break
        q_new = q + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not (0.0 < q_new < L):
            hit = True
            break
        q = q_new
        if n % output_stride == 0 or n == n_steps:
            times.append(n * dt)
            qs.append(q)
    return PlanarTrajectory(np.asarray(times), np.asarray(qs), boundary_hit=hit)


# ---------------------------------------------------------------------------
# linear stability
# ---------------------------------------------------------------------------

def _is_normalized_setting(sharp: SharpParams, q: float) -> bool:
    """S+ = -1, S- = m+- = rho+- = 1 with the front at its root L/2."""
    try:
        checks = (
            abs(sharp.d_plus + 1.0), abs(sharp.d_minus - 1.0),
            abs(sharp.lambda_plus - 1.0), abs(sharp.lambda_minus - 1.0),
            abs(sharp.m_plus - 1.0), abs(sharp.m_minus - 1.0),
            abs(q - 0.5 * sharp.length_L),
        )
    except ConfigurationError:
        return False
    return max(checks) < _NORMALIZED_TOL


def amplification(sharp: SharpParams, beta: float, q: float, mode: ModeIndex) -> StabilityRow:
    """Amplification factor of a transverse cosine perturbation.

    The perturbation amplitude satisfies 2 dY/dt = factor * Y, so the
    exponential growth rate to compare against measurements is factor / 2.
    The front may be non-stationary: the factor is evaluated with the front
    frozen at ``q``.
    """
    sharp.require_planar()
    L, Lt = sharp.length_L, sharp.width_Lt
    if not (0.0 < q < L):
        raise ConfigurationError(f"front position must lie in (0, {L}), got {q}")
    k_transverse = math.pi**2 * mode.l_sq / Lt**2  # equals -zeta/Lt^2 >= 0
    gamma_plus = math.sqrt(sharp.lambda_plus**2 + k_transverse)
    gamma_minus = math.sqrt(sharp.lambda_minus**2 + k_transverse)
    surf = 0.5 * sharp.gamma * beta * k_transverse
    num_plus = (sharp.d_plus * sharp.lambda_plus * math.tanh(sharp.lambda_plus * q) + surf)
    num_minus = (sharp.d_minus * sharp.lambda_minus
                 * math.tanh(sharp.lambda_minus * (L - q)) - surf)
    a_plus = num_plus / math.cosh(gamma_plus * q)
    a_minus = -num_minus / math.cosh(gamma_minus * (L - q))
    # a*Gamma*sinh(...) written via tanh so huge transverse modes cannot overflow
    factor = (
        sharp.s_plus - sharp.s_minus
        - sharp.m_plus * num_plus * gamma_plus * math.tanh(gamma_plus * q)
        + sharp.m_minus * num_minus * gamma_minus * math.tanh(gamma_minus * (L - q))
    )
    crit = None
    if mode.l_sq > 0 and _is_normalized_setting(sharp, q):
        crit = beta_crit(L, Lt, sharp.gamma, mode)
    return StabilityRow(
        mode=mode,
        gamma_plus=gamma_plus,
        gamma_minus=gamma_minus,
        a_plus=a_plus,
        a_minus=a_minus,
        factor=factor,
        beta_crit=crit,
    )


def amplification_normalized(beta: float, Lbig: float, Lt: float, gamma: float,
                             mode: ModeIndex) -> float:
    """Specialized amplification factor for S+ = -1, S- = m+- = rho+- = 1, q = L/2."""
    k_transverse = math.pi**2 * mode.l_sq / Lt**2
    root = math.sqrt(1.0 + k_transverse)
    return -2.0 + root * math.tanh(0.5 * Lbig * root) * (
        2.0 * math.tanh(0.5 * Lbig) - gamma * beta * k_transverse)


def beta_crit(Lbig: float, Lt: float, gamma: float, mode: ModeIndex) -> float:
    """Critical surface-energy coefficient below which the mode grows.

    Only meaningful in the normalized setting; undefined for the
    translational mode (the formula divides by |l_hat|^2).
    """
    if mode.l_sq == 0:
        raise ValueError("beta_crit is undefined for the translational mode l=0")
    k_transverse = math.pi**2 * mode.l_sq / Lt**2
    root = math.sqrt(1.0 + k_transverse)
    return (2.0 / gamma) / k_transverse * (
        math.tanh(0.5 * Lbig) - 1.0 / (root * math.tanh(0.5 * Lbig * root)))


def enumerate_modes(d: int, max_lsq: int) -> list[ModeIndex]:
    """All transverse modes in N_0^(d-1) with |l_hat|^2 <= max_lsq.

    Sorted by (l_sq, l_vec); use :func:`mode_representatives` to keep one
    mode per attainable |l_hat|^2 value.
    """
    if d not in (2, 3):
        raise ConfigurationError(f"spatial dimension must be 2 or 3, got {d}")
    if max_lsq < 0:
        raise ConfigurationError(f"max_lsq must be nonnegative, got {max_lsq}")
    l_max = int(math.isqrt(max_lsq))
    modes = []
    if d == 2:
        for l2 in range(l_max + 1):
            if l2 * l2 <= max_lsq:
                modes.append(ModeIndex.of(l2))
    else:
        for l2 in range(l_max + 1):
            for l3 in range(l_max + 1):
                if l2 * l2 + l3 * l3 <= max_lsq:
                    modes.append(ModeIndex.of(l2, l3))
    modes.sort(key=lambda m: (m.l_sq, m.l_vec))
    return modes


def mode_representatives(modes: list[ModeIndex]) -> list[ModeIndex]:
    """First mode of each distinct |l_hat|^2 value, in increasing order."""
    seen = {}
    for mode in sorted(modes, key=lambda m: (m.l_sq, m.l_vec)):
        seen.setdefault(mode.l_sq, mode)
    return [seen[k] for k in sorted(seen)]
