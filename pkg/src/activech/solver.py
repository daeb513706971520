"""Mass-lumped P1 finite element discretization with semi-implicit stepping.

Each step solves the coupled system

    (1/tau) (phi^{n+1} - phi^n, chi)^h + (m(phi^n) grad mu^{n+1}, grad chi) = (S_eps(phi^n), chi)^h
    beta eps (grad phi^{n+1}, grad eta) + (beta/eps) (psi'(phi^{n+1}), eta)^h = (mu^{n+1}, eta)^h

by Newton iteration on the psi' term.  Mobility and source are lagged at
phi^n, so within a step only the diagonal psi'' block of the Jacobian
changes between Newton iterates.  The linear solves use a Schur reduction
onto the phi unknowns (the lumped mass matrix is diagonal, so eliminating
mu is exact) with a direct factorization that is reused across solves via
residual-controlled iterative refinement.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .errors import ConfigurationError, NumericalError, ResolutionWarning, StepFailureError
from .mesh import NodalField, StructuredMesh, build_mesh, element_means, stiffness_matrix
from .model import PhaseFieldParams, mobility_m, source_S
from .initial import init_field

PHI_BOUND_WARN = 1.1


@dataclass(frozen=True)
class SolverConfig:
    tau: float = 1e-3
    newton_tol: float = 1e-9
    newton_max: int = 20
    linear_tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.tau <= 0.0 or self.newton_tol <= 0.0 or self.linear_tol <= 0.0:
            raise ConfigurationError("tau and solver tolerances must be positive")
        if self.newton_max < 1:
            raise ConfigurationError("newton_max must be at least 1")


@dataclass
class SimState:
    phi: NodalField
    mu: NodalField
    t: float
    step: int

    def __post_init__(self):
        if self.phi.mesh is not self.mu.mesh:
            raise ConfigurationError("phi and mu must live on the same mesh")


@dataclass
class StepReport:
    """Newton diagnostics for one accepted time step."""

    iterations: int
    residuals: list[float]
    refactorized: bool


class Stepper:
    """Reusable assembly and linear algebra for one (mesh, params, config)."""

    def __init__(self, mesh: StructuredMesh, params: PhaseFieldParams, config: SolverConfig):
        self.mesh = mesh
        self.p = params
        self.cfg = config
        self.K = stiffness_matrix(mesh)
        self.w = mesh.lumped
        self._inv_w = sparse.diags(1.0 / self.w)
        self._d1 = sparse.diags(self.w / config.tau)
        self._lu = None
        self._pattern_template = None
        if mesh.h > params.epsilon * math.sqrt(2.0) / 4.0:
            warnings.warn(
                f"mesh size h={mesh.h:g} is too coarse for epsilon={params.epsilon:g}; "
                "the diffuse interface spans fewer than ~9 nodes",
                ResolutionWarning, stacklevel=2)

    # -- pieces -----------------------------------------------------------

    def source_nodal(self, phi: np.ndarray) -> np.ndarray:
        return source_S(self.p.reaction, self.p.potential, self.p.epsilon, phi)

    def mobility_stiffness(self, phi: np.ndarray) -> sparse.csr_matrix:
        # lumped quadrature of m(phi^n) grad mu . grad chi gives per-element
        # vertex-averaged mobility against piecewise-constant gradients
        coeff = mobility_m(self.p.mobility, element_means(self.mesh, phi))
        return stiffness_matrix(self.mesh, coeff=np.asarray(coeff))

    def initial_mu(self, phi: np.ndarray) -> np.ndarray:
        """mu solving the chemical-potential equation for a given phi."""
        beta, eps = self.p.beta, self.p.epsilon
        return beta * eps * (self.K @ phi) / self.w + (beta / eps) * self.p.potential.dpsi(phi)

    # -- linear algebra ---------------------------------------------------

    def _solve(self, S: sparse.csc_matrix, rhs: np.ndarray) -> np.ndarray:
        """Solve S x = rhs to relative residual <= linear_tol.

        Tries the most recent factorization with iterative refinement first;
        falls back to refactorizing S when the refinement stalls.
        """
        rhs_norm = float(np.linalg.norm(rhs))
        if rhs_norm == 0.0:
            return np.zeros_like(rhs)
        tol = self.cfg.linear_tol

        def refine(lu):
            x = lu.solve(rhs)
            r = rhs - S @ x
            rel = float(np.linalg.norm(r)) / rhs_norm
            for _ in range(12):
                if rel <= tol:
                    break
                x = x + lu.solve(r)
                r = rhs - S @ x
                new_rel = float(np.linalg.norm(r)) / rhs_norm
                if new_rel >= 0.7 * rel:
                    rel = new_rel
                    break
                rel = new_rel
            return x, rel

        if self._lu is not None:
            x, rel = refine(self._lu)
            if rel <= tol:
                return x
        self._lu = splu(S)
        self._last_refactor = True
        x, rel = refine(self._lu)
        if rel > tol:
            raise NumericalError(
                f"linear solver stalled at relative residual {rel:.3e} "
                f"(target {tol:.1e})")
        return x

    # -- Newton step ------------------------------------------------------

    def step(self, phi_old: np.ndarray, mu_old: np.ndarray, step_index: int = 0):
        """Advance one step; returns (phi, mu, StepReport)."""
        p, cfg = self.p, self.cfg
        beta, eps, tau = p.beta, p.epsilon, cfg.tau
        w, K = self.w, self.K
        Km = self.mobility_stiffness(phi_old)
        svec = self.source_nodal(phi_old)
        rhs_mass = w * (phi_old / tau + svec)

        # step-constant parts of the Schur complement
        P = (Km @ self._inv_w @ K).tocsr()
        base = (self._d1 + beta * eps * P).tocsr()

        phi = phi_old.copy()
        mu = mu_old.copy()
        self._last_refactor = False
        residuals = []
        converged = False
        for _ in range(cfg.newton_max + 1):
            r1 = (w / tau) * phi + Km @ mu - rhs_mass
            r2 = beta * eps * (K @ phi) + (beta / eps) * w * p.potential.dpsi(phi) - w * mu
            res = math.hypot(float(np.linalg.norm(r1)), float(np.linalg.norm(r2)))
            residuals.append(res)
            if res < cfg.newton_tol:
                converged = True
                break
            if len(residuals) > cfg.newton_max:
                break
            ddpsi = np.asarray(p.potential.ddpsi(phi))
            S = (base + (beta / eps) * (Km @ sparse.diags(ddpsi))).tocsc()
            rhs = -(r1 + Km @ (r2 / w))
            dphi = self._solve(S, rhs)
            dmu = (beta * eps * (K @ dphi) + (beta / eps) * w * ddpsi * dphi + r2) / w
            phi = phi + dphi
            mu = mu + dmu
        if not converged:
            raise StepFailureError(
                f"Newton failed to reach {cfg.newton_tol:.1e} within "
                f"{cfg.newton_max} iterations (last residual {residuals[-1]:.3e})",
                step=step_index, residuals=residuals)
        return phi, mu, StepReport(
            iterations=len(residuals) - 1,
            residuals=residuals,
            refactorized=self._last_refactor,
        )


def time_step(state: SimState, p: PhaseFieldParams, cfg: SolverConfig) -> SimState:
    """Advance a single step (convenience wrapper; rebuilds assembly)."""
    stepper = Stepper(state.phi.mesh, p, cfg)
    phi, mu, _ = stepper.step(state.phi.values, state.mu.values, state.step)
    return SimState(
        phi=NodalField(phi, state.phi.mesh),
        mu=NodalField(mu, state.phi.mesh),
        t=(state.step + 1) * cfg.tau,
        step=state.step + 1,
    )


def free_energy(field: NodalField, mesh: StructuredMesh, p: PhaseFieldParams) -> float:
    """Ginzburg-Landau energy: beta (eps/2 |grad phi|^2 + psi(phi)/eps).

    The gradient term is exact for P1; the potential term uses the lumped
    quadrature, consistent with the scheme.
    """
    if field.values.shape != (mesh.n_nodes,):
        raise ConfigurationError("field does not match the mesh")
    K = stiffness_matrix(mesh)
    grad_term = 0.5 * p.epsilon * float(field.values @ (K @ field.values))
    pot_term = float(np.dot(mesh.lumped, p.potential.psi(field.values))) / p.epsilon
    return p.beta * (grad_term + pot_term)


# ---------------------------------------------------------------------------
# run driver
# ---------------------------------------------------------------------------

@dataclass
class RunRecord:
    """Diagnostic time series and final state of a simulation run."""

    times: np.ndarray
    mass: np.ndarray
    energy: np.ndarray
    q_h: np.ndarray
    mode_amps: np.ndarray | None
    newton_iters: list[int]
    max_abs_phi: float
    warnings: list[str] = field(default_factory=list)
    state: SimState | None = None
    wall_seconds: float = 0.0


def make_state(mesh: StructuredMesh, p: PhaseFieldParams, cfg: SolverConfig,
               init_kind: str, init_params: dict) -> SimState:
    """Initial (phi, mu) at t = 0; mu is defined through the phi equation."""
    phi = init_field(mesh, init_kind, init_params, p.epsilon)
    stepper = Stepper(mesh, p, cfg)
    mu = stepper.initial_mu(phi.values)
    return SimState(phi=phi, mu=NodalField(mu, mesh), t=0.0, step=0)


def run_simulation(p: PhaseFieldParams, mesh_spec, init_spec, cfg: SolverConfig,
                   t_end: float, outputs=None) -> RunRecord:
    """Advance the scheme to ``t_end``, recording diagnostics each stride.

    ``mesh_spec`` is a StructuredMesh or a (dim, lengths, h) tuple;
    ``init_spec`` is a NodalField or a (kind, params) tuple.  ``outputs``
    is an :class:`activech.output.OutputOptions`; when it names a
    directory, the diagnostics CSV, VTK snapshots, a final checkpoint and
    the run manifest are written there.  Fully deterministic for a fixed
    seed and thread count.
    """
    from . import output as outmod
    from .analysis import interface_position, mode_amplitudes
    from .errors import TrackingError

    opts = outputs if outputs is not None else outmod.OutputOptions()
    mesh = mesh_spec if isinstance(mesh_spec, StructuredMesh) else build_mesh(*mesh_spec)
    if isinstance(init_spec, NodalField):
        phi0 = init_spec
        if phi0.mesh is not mesh:
            raise ConfigurationError("initial field lives on a different mesh")
    else:
        kind, init_params = init_spec
        phi0 = init_field(mesh, kind, init_params, p.epsilon)

    n_steps = int(round(t_end / cfg.tau))
    if abs(n_steps * cfg.tau - t_end) > 1e-9 * max(1.0, abs(t_end)):
        raise ConfigurationError(
            f"t_end={t_end} is not an integer multiple of tau={cfg.tau}")

    stepper = Stepper(mesh, p, cfg)
    phi = phi0.values.copy()
    mu = stepper.initial_mu(phi)
    writer = outmod.RunWriter(opts, mesh) if opts.directory else None

    times, mass, energy, q_trace, mode_rows = [], [], [], [], []
    newton_iters: list[int] = []
    run_warnings: list[str] = []
    max_abs_phi = 0.0
    prev_q = None
    t0 = time.perf_counter()

    def record(step, t, phi_vec, mu_vec):
        nonlocal prev_q, max_abs_phi
        fld = NodalField(phi_vec, mesh)
        times.append(t)
        mass.append(float(np.dot(mesh.lumped, phi_vec)))
        energy.append(free_energy(fld, mesh, p))
        q_now = math.nan
        if opts.track_interface:
            try:
                q_now = interface_position(fld, mesh, line_x2=opts.track_line, prev=prev_q)
                prev_q = q_now
            except TrackingError as exc:
                _warn_once(run_warnings, f"interface tracking: {exc}")
        q_trace.append(q_now)
        if opts.modes_lmax is not None:
            try:
                spectrum = mode_amplitudes(fld, mesh, opts.modes_lmax)
                mode_rows.append(spectrum.amplitudes)
            except Exception as exc:  # measurement errors must not kill the run
                mode_rows.append(np.full(opts.modes_lmax + 1, np.nan))
                _warn_once(run_warnings, f"mode extraction: {exc}")
        max_abs_phi = max(max_abs_phi, float(np.max(np.abs(phi_vec))))
        if writer:
            writer.snapshot(step, t, phi_vec, mu_vec)

    if writer:
        writer.start_manifest(run_warnings)
    try:
        record(0, 0.0, phi, mu)
        for n in range(1, n_steps + 1):
            phi, mu, report = stepper.step(phi, mu, step_index=n)
            newton_iters.append(report.iterations)
            if n % opts.stride == 0 or n == n_steps:
                record(n, n * cfg.tau, phi, mu)
        if max_abs_phi > PHI_BOUND_WARN:
            _warn_once(run_warnings,
                       f"phase field left [-{PHI_BOUND_WARN}, {PHI_BOUND_WARN}]: "
                       f"max |phi| = {max_abs_phi:.4f}")
            warnings.warn(run_warnings[-1], UserWarning, stacklevel=2)
    except Exception:
        if writer:
            writer.abort()
        raise

    state = SimState(phi=NodalField(phi, mesh), mu=NodalField(mu, mesh),
                     t=n_steps * cfg.tau, step=n_steps)
    rec = RunRecord(
        times=np.asarray(times), mass=np.asarray(mass), energy=np.asarray(energy),
        q_h=np.asarray(q_trace),
        mode_amps=np.asarray(mode_rows) if mode_rows else None,
        newton_iters=newton_iters, max_abs_phi=max_abs_phi,
        warnings=run_warnings, state=state,
        wall_seconds=time.perf_counter() - t0,
    )
    if writer:
        writer.finish(rec)
    return rec


def _warn_once(sink: list[str], message: str):
    if message not in sink:
        sink.append(message)
