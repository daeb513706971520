"""Initial data: diffuse-interface representations of sharp geometries."""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigurationError
from .mesh import NodalField, StructuredMesh

SQRT2 = math.sqrt(2.0)


def _require(params: dict, *keys):
    missing = [k for k in keys if k not in params]
    if missing:
        raise ConfigurationError(f"initial condition missing parameters: {missing}")


def _as_list(value) -> list:
    """Single scalars and tuples both arrive from configuration files."""
    if value is None:
        return []
    if isinstance(value, (list, tuple, np.ndarray)):
        return list(value)
    return [value]


def _check_disk(mesh: StructuredMesh, center, r0: float):
    if mesh.dim != 2:
        raise ConfigurationError("disk initial data requires a 2D mesh")
    if r0 <= 0.0:
        raise ConfigurationError(f"disk radius must be positive, got {r0}")
    for c, length in zip(center, mesh.lengths):
        if c - r0 < 0.0 or c + r0 > length:
            raise ConfigurationError(
                f"disk (center={center}, r0={r0}) does not fit inside the domain")


def front_perturbation_coefficients(n_modes: int, bound: float, seed: int) -> np.ndarray:
    """Seeded random coefficients for modes 1..n with total magnitude < bound.

    Coefficients are uniform in [-1, 1] and rescaled so the sum of their
    absolute values equals ``bound``, which caps the sup-norm of the
    resulting cosine sum.
    """
    rng = np.random.default_rng(seed)
    coeffs = rng.uniform(-1.0, 1.0, size=n_modes)
    total = np.sum(np.abs(coeffs))
    if total > 0.0:
        coeffs *= bound / total
    return coeffs


def init_field(mesh: StructuredMesh, kind: str, params: dict, epsilon: float) -> NodalField:
    """Nodal interpolation of tanh(d0(x) / (eps sqrt(2))) for the given geometry.

    Supported kinds: constant, flat_front, disk, perturbed_disk,
    random_spinodal, three_disks.
    """
    params = dict(params or {})
    x1 = mesh.coords[:, 0]
    x2 = mesh.coords[:, 1] if mesh.dim == 2 else None

    if kind == "constant":
        _require(params, "value")
        return NodalField(np.full(mesh.n_nodes, float(params["value"])), mesh)

    if kind == "flat_front":
        _require(params, "q0")
        q0 = float(params["q0"])
        if not (0.0 < q0 < mesh.lengths[0]):
            raise ConfigurationError(f"front position q0={q0} outside the domain")
        modes = _as_list(params.get("modes"))
        amplitudes = _as_list(params.get("amplitudes"))
        if "n_random_modes" in params:
            if modes:
                raise ConfigurationError("give either explicit modes or n_random_modes")
            n = int(params["n_random_modes"])
            modes = list(range(1, n + 1))
            amplitudes = list(front_perturbation_coefficients(
                n, float(params.get("bound", 0.1)), int(params.get("seed", 0))))
        if len(modes) != len(amplitudes):
            raise ConfigurationError("modes and amplitudes must have equal length")
        if modes and mesh.dim == 1:
            raise ConfigurationError("transverse perturbations need a 2D mesh")
        d0 = q0 - x1
        if modes:
            width = mesh.lengths[1]
            for k, amp in zip(modes, amplitudes):
                d0 = d0 + amp * np.cos(math.pi * k * x2 / width)
        return NodalField(np.tanh(d0 / (epsilon * SQRT2)), mesh)

    if kind == "disk":
        _require(params, "center", "r0")
        center = tuple(float(c) for c in params["center"])
        r0 = float(params["r0"])
        _check_disk(mesh, center, r0)
        dist = np.hypot(x1 - center[0], x2 - center[1])
        return NodalField(np.tanh((r0 - dist) / (epsilon * SQRT2)), mesh)

    if kind == "perturbed_disk":
        _require(params, "center", "r0")
        center = tuple(float(c) for c in params["center"])
        r0 = float(params["r0"])
        amp = float(params.get("amplitude", 0.02))
        mode = int(params.get("mode", 2))
        phase = float(params.get("phase", 2.0 * math.pi / 9.0))
        _check_disk(mesh, center, r0 + abs(amp))
        dx, dy = x1 - center[0], x2 - center[1]
        theta = np.arctan2(dy, dx)
        radius = r0 + amp * np.cos(mode * theta - phase)
        dist = np.hypot(dx, dy)
        return NodalField(np.tanh((radius - dist) / (epsilon * SQRT2)), mesh)

    if kind == "random_spinodal":
        _require(params, "bound")
        bound = float(params["bound"])
        rng = np.random.default_rng(int(params.get("seed", 0)))
        values = rng.uniform(-bound, bound, size=mesh.n_nodes)
        # zero mean in the lumped inner product, so the discrete mass vanishes
        values -= np.dot(mesh.lumped, values) / np.sum(mesh.lumped)
        return NodalField(values, mesh)

    if kind == "three_disks":
        _require(params, "centers", "radii")
        raw_centers = params["centers"]
        if isinstance(raw_centers, tuple) and raw_centers \
                and not isinstance(raw_centers[0], (tuple, list)):
            raw_centers = [raw_centers]
        centers = [tuple(float(c) for c in cc) for cc in raw_centers]
        radii = [float(r) for r in _as_list(params["radii"])]
        if len(centers) != len(radii) or not centers:
            raise ConfigurationError("centers and radii must be nonempty and equal length")
        for center, r0 in zip(centers, radii):
            _check_disk(mesh, center, r0)
        d0 = np.full(mesh.n_nodes, -np.inf)
        for center, r0 in zip(centers, radii):
            d0 = np.maximum(d0, r0 - np.hypot(x1 - center[0], x2 - center[1]))
        return NodalField(np.tanh(d0 / (epsilon * SQRT2)), mesh)

    raise ConfigurationError(f"unknown initial condition kind: {kind!r}")
