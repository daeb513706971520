"""Validation instruments.

Interface tracking along lattice lines, transverse cosine-mode amplitude
extraction, growth-rate fitting and the diffuse-vs-sharp convergence study
with its experimental order of convergence.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, MeasurementError, TrackingError
from .mesh import NodalField, StructuredMesh, build_mesh
from .model import PhaseFieldParams, derive_sharp_params
from .planar import PlanarConfig, integrate_q
from .solver import SolverConfig, Stepper
from .initial import init_field


# ---------------------------------------------------------------------------
# interface tracking
# ---------------------------------------------------------------------------

def line_values(field: NodalField, mesh: StructuredMesh, line_x2: float = 0.0):
    """Nodal values and x1 coordinates along the lattice line x2 = line_x2."""
    if mesh.dim == 1:
        return field.values, mesh.coords[:, 0]
    j = int(round(line_x2 / mesh.h))
    j = min(max(j, 0), mesh.cells[1])
    n1 = mesh.cells[0]
    idx = slice(j * (n1 + 1), (j + 1) * (n1 + 1))
    return field.values[idx], mesh.coords[idx, 0]


def zero_crossings(values: np.ndarray, coords: np.ndarray) -> list[float]:
    """Linear-interpolation zeros of a nodal profile, left to right."""
    out = []
    v = np.asarray(values, dtype=float)
    for i in range(len(v) - 1):
        a, b = v[i], v[i + 1]
        if a == 0.0:
            if not out or out[-1] != coords[i]:
                out.append(float(coords[i]))
        elif a * b < 0.0:
            out.append(float(coords[i] + (coords[i + 1] - coords[i]) * a / (a - b)))
    if v[-1] == 0.0:
        out.append(float(coords[-1]))
    return out


def interface_crossings(field: NodalField, mesh: StructuredMesh,
                        line_x2: float = 0.0) -> list[float]:
    """All sign-change positions of the field along a lattice line."""
    values, coords = line_values(field, mesh, line_x2)
    return zero_crossings(values, coords)


def track_interface(field: NodalField, mesh: StructuredMesh, line_x2: float = 0.0,
                    prev: float | None = None) -> float:
    """Front position: the zero crossing along x2 = line_x2.

    With several crossings the one nearest ``prev`` is returned; without a
    previous value an ambiguous profile is an error, as is a profile with
    no sign change at all.
    """
    crossings = interface_crossings(field, mesh, line_x2)
    if not crossings:
        raise TrackingError("no sign change along the tracking line")
    if len(crossings) == 1:
        return crossings[0]
    if prev is None or not math.isfinite(prev):
        raise TrackingError(
            f"{len(crossings)} crossings at {[f'{c:.4f}' for c in crossings]} "
            "and no previous position to disambiguate")
    return min(crossings, key=lambda c: abs(c - prev))


# name used by run drivers; identical semantics
interface_position = track_interface


@dataclass
class InterfaceTrace:
    """Front positions over time along a fixed tracking line."""

    times: np.ndarray
    q_h: np.ndarray
    line_x2: float = 0.0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.q_h = np.asarray(self.q_h, dtype=float)
        if self.times.shape != self.q_h.shape:
            raise ConfigurationError("times and positions must have equal length")
        if np.any(np.diff(self.times) <= 0.0):
            raise ConfigurationError("times must be strictly increasing")


# ---------------------------------------------------------------------------
# transverse mode spectrum
# ---------------------------------------------------------------------------

@dataclass
class ModeSpectrum:
    """Cosine-mode amplitudes of the interface height at one instant."""

    amplitudes: np.ndarray
    l_max: int

    def dominant(self) -> int:
        """Index of the largest-magnitude mode with l >= 1."""
        return 1 + int(np.argmax(np.abs(self.amplitudes[1:])))


def interface_height(field: NodalField, mesh: StructuredMesh) -> np.ndarray:
    """Front position per lattice row: h(x2_j) from per-row zero crossings."""
    if mesh.dim != 2:
        raise MeasurementError("mode extraction requires a 2D mesh")
    grid = mesh.grid_view(field.values)
    x1 = mesh.coords[: mesh.cells[0] + 1, 0]
    heights = np.empty(grid.shape[0])
    bad = []
    for j in range(grid.shape[0]):
        crossings = zero_crossings(grid[j], x1)
        if len(crossings) != 1:
            bad.append((j, len(crossings)))
        else:
            heights[j] = crossings[0]
    if bad:
        raise MeasurementError(
            "rows without a unique interface crossing (row, count): " + repr(bad[:12]))
    return heights


def mode_amplitudes(field: NodalField, mesh: StructuredMesh, l_max: int) -> ModeSpectrum:
    """Trapezoid-weighted cosine projection of the interface height."""
    heights = interface_height(field, mesh)
    width = mesh.lengths[1]
    x2 = np.arange(len(heights)) * mesh.h
    trap = np.full(len(heights), mesh.h)
    trap[0] = trap[-1] = 0.5 * mesh.h
    amps = np.empty(l_max + 1)
    for l in range(l_max + 1):
        basis = np.cos(math.pi * l * x2 / width)
        amps[l] = (2.0 - (l == 0)) / width * float(np.sum(trap * heights * basis))
    return ModeSpectrum(amplitudes=amps, l_max=l_max)


# ---------------------------------------------------------------------------
# growth-rate fitting
# ---------------------------------------------------------------------------

def fit_growth_rate(times, amplitudes) -> float:
    """Least-squares slope of log A(t); amplitudes must be positive."""
    times = np.asarray(times, dtype=float)
    amps = np.asarray(amplitudes, dtype=float)
    if times.shape != amps.shape or times.size < 2:
        raise ConfigurationError("need at least two (t, A) samples of equal length")
    if np.any(amps <= 0.0):
        raise MeasurementError("growth-rate fit window contains nonpositive amplitudes")
    slope, _ = np.polyfit(times, np.log(amps), 1)
    return float(slope)


def growth_window(times, amplitudes, width_Lt: float,
                  takeoff: float = 3.0, saturation: float = 0.1) -> tuple[int, int]:
    """Fit window for the linear regime of one mode amplitude.

    Starts once |A| exceeds ``takeoff`` times its initial magnitude and ends
    before |A| exceeds ``saturation * width_Lt``.  Returns (start, stop)
    indices, stop exclusive.
    """
    amps = np.abs(np.asarray(amplitudes, dtype=float))
    if amps.size < 2:
        raise MeasurementError("not enough samples for a growth window")
    a0 = amps[0]
    above = np.nonzero(amps > takeoff * a0)[0]
    start = int(above[0]) if above.size else 0
    saturated = np.nonzero(amps > saturation * width_Lt)[0]
    stop = int(saturated[0]) if saturated.size else amps.size
    if stop - start < 2:
        start, stop = 0, min(amps.size, max(2, stop))
    return start, stop


# ---------------------------------------------------------------------------
# convergence study
# ---------------------------------------------------------------------------

def auto_mesh_size(epsilon: float) -> float:
    """Fine mesh size for epsilon = 1/(2^k pi): h = 2^-(3+k).

    This keeps 2^(3+k) cells per unit length, matching the resolution used
    for the reference experiments; other epsilon values need an explicit h.
    """
    k = math.log2(1.0 / (math.pi * epsilon))
    if abs(k - round(k)) > 1e-9:
        raise ConfigurationError(
            f"epsilon={epsilon!r} is not of the form 1/(2^k pi); give h explicitly")
    return 2.0 ** -(3 + round(k))


@dataclass(frozen=True)
class ConvergenceRow:
    epsilon: float
    h: float
    error: float
    eoc: float | None
    note: str = ""


@dataclass
class ConvergenceTable:
    rows: list[ConvergenceRow] = field(default_factory=list)

    def errors(self) -> list[float]:
        return [r.error for r in self.rows]


def _eoc(prev: ConvergenceRow | None, epsilon: float, error: float) -> float | None:
    if prev is None or not (math.isfinite(prev.error) and math.isfinite(error)):
        return None
    if prev.epsilon == epsilon or prev.error <= 0.0 or error <= 0.0:
        return None
    return math.log(prev.error / error) / math.log(prev.epsilon / epsilon)


def eoc_sequence(epsilons, errors) -> list[float | None]:
    """EOC entries for given ladders (first entry absent)."""
    rows: list[float | None] = []
    prev = None
    for eps, err in zip(epsilons, errors):
        rows.append(_eoc(prev, eps, err))
        prev = ConvergenceRow(epsilon=eps, h=0.0, error=err, eoc=None)
    return rows


def reference_front_position(p: PhaseFieldParams, length_L: float, width_Lt: float,
                             q0: float, t_end: float, dt: float = 1e-5) -> float:
    """Sharp-interface front position from the planar ODE."""
    sharp = derive_sharp_params(p, length_L, width_Lt)
    traj = integrate_q(PlanarConfig(sharp=sharp, q0=q0, dt=dt, t_end=t_end))
    if traj.boundary_hit:
        raise ConfigurationError("reference front left the domain before t_end")
    return float(traj.q[-1])


def _front_error_once(p: PhaseFieldParams, epsilon: float, dim: int, lengths,
                      q0: float, t_end: float, cfg: SolverConfig, h: float | None):
    from dataclasses import replace

    p_eps = replace(p, epsilon=epsilon)
    h_eff = auto_mesh_size(epsilon) if h is None else h
    mesh = build_mesh(dim, lengths[:dim], h_eff)
    phi0 = init_field(mesh, "flat_front", {"q0": q0}, epsilon)
    stepper = Stepper(mesh, p_eps, cfg)
    phi = phi0.values.copy()
    mu = stepper.initial_mu(phi)
    n_steps = int(round(t_end / cfg.tau))
    for n in range(1, n_steps + 1):
        phi, mu, _ = stepper.step(phi, mu, step_index=n)
    q_h = track_interface(NodalField(phi, mesh), mesh, line_x2=0.0, prev=q0)
    return q_h, h_eff


def convergence_study(p: PhaseFieldParams, epsilons, t_end: float, *,
                      lengths=(1.0, 1.0), q0: float = 0.3, dim: int = 1,
                      cfg: SolverConfig | None = None, h: float | None = None,
                      reference_dt: float = 1e-5, max_workers: int | None = None,
                      ) -> ConvergenceTable:
    """Front-position error against the sharp ODE for a decreasing epsilon ladder.

    The flat-front problem is genuinely one-dimensional, so ``dim=1`` is the
    fast default; ``dim=2`` runs the full planar geometry.  Failures of
    individual runs annotate their row instead of aborting the ladder.
    """
    epsilons = [float(e) for e in epsilons]
    if len(epsilons) > 1 and any(b >= a for a, b in zip(epsilons, epsilons[1:])):
        raise ConfigurationError("epsilon ladder must be strictly decreasing")
    cfg = cfg or SolverConfig()
    q_ref = reference_front_position(p, lengths[0], lengths[1] if len(lengths) > 1 else 1.0,
                                     q0, t_end, dt=reference_dt)

    workers = max_workers
    if workers is None:
        workers = int(os.environ.get("ACTIVE_CH_THREADS", "1") or 1)
    results: list[tuple[float, float, str]] = []

    def one(eps: float):
        try:
            q_h, h_eff = _front_error_once(p, eps, dim, lengths, q0, t_end, cfg, h)
            return abs(q_ref - q_h), h_eff, ""
        except Exception as exc:  # annotate, don't abort the ladder
            return math.nan, h if h is not None else math.nan, f"{type(exc).__name__}: {exc}"

    if workers > 1 and len(epsilons) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, epsilons))
    else:
        results = [one(e) for e in epsilons]

    table = ConvergenceTable()
    prev = None
    for eps, (err, h_eff, note) in zip(epsilons, results):
        row = ConvergenceRow(epsilon=eps, h=h_eff, error=err,
                             eoc=_eoc(prev, eps, err), note=note)
        table.rows.append(row)
        prev = row
    return table
