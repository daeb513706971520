"""Uniform simplicial meshes and P1 nodal fields.

1D: intervals.  2D: a lattice of squares, each split into two triangles
along the same (bottom-left to top-right) diagonal.  Nodes are ordered
x-fastest, matching the flat layout of snapshot and checkpoint files.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import ConfigurationError


@dataclass(frozen=True, eq=False)
class StructuredMesh:
    dim: int
    lengths: tuple[float, ...]
    cells: tuple[int, ...]
    h: float
    coords: np.ndarray          # (n_nodes, dim)
    elements: np.ndarray        # (n_elements, dim + 1), int32
    lumped: np.ndarray          # (n_nodes,) diagonal mass weights
    element_volume: float

    @property
    def n_nodes(self) -> int:
        return self.coords.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def node_shape(self) -> tuple[int, ...]:
        """Lattice shape (n1+1,) or (n1+1, n2+1)."""
        return tuple(n + 1 for n in self.cells)

    @property
    def volume(self) -> float:
        out = 1.0
        for length in self.lengths:
            out *= length
        return out

    def node_index(self, i: int, j: int = 0) -> int:
        return i + j * (self.cells[0] + 1)

    def grid_view(self, values: np.ndarray) -> np.ndarray:
        """Reshape flat nodal values to the lattice, indexed [j, i] in 2D."""
        if self.dim == 1:
            return values
        return values.reshape(self.cells[1] + 1, self.cells[0] + 1)


@dataclass(eq=False)
class NodalField:
    """P1 finite element function given by its nodal values."""

    values: np.ndarray
    mesh: StructuredMesh

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.n_nodes,):
            raise ConfigurationError(
                f"field has {self.values.shape} values for a mesh with "
                f"{self.mesh.n_nodes} nodes")
        if not np.all(np.isfinite(self.values)):
            raise ConfigurationError("field contains non-finite values")

    def copy(self) -> "NodalField":
        return NodalField(self.values.copy(), self.mesh)


def _cells_for(length: float, h: float) -> int:
    n = int(round(length / h))
    if n < 1 or abs(n * h - length) > 1e-12 * max(1.0, length):
        raise ConfigurationError(
            f"mesh size h={h} does not divide the domain length {length}")
    return n


def build_mesh(dim: int, lengths, h: float) -> StructuredMesh:
    """Uniform lattice mesh of (0, L1) or (0, L1) x (0, L2) with spacing h."""
    if h <= 0.0:
        raise ConfigurationError(f"mesh size must be positive, got {h}")
    lengths = tuple(float(x) for x in (lengths if np.iterable(lengths) else (lengths,)))
    if len(lengths) != dim:
        raise ConfigurationError(f"{dim}D mesh needs {dim} lengths, got {lengths}")
    if any(x <= 0.0 for x in lengths):
        raise ConfigurationError(f"domain lengths must be positive, got {lengths}")

    if dim == 1:
        n1 = _cells_for(lengths[0], h)
        coords = (np.arange(n1 + 1, dtype=float) * h)[:, None]
        elements = np.column_stack([np.arange(n1), np.arange(1, n1 + 1)]).astype(np.int32)
        volume = h
    elif dim == 2:
        if lengths[1] > lengths[0]:
            raise ConfigurationError(
                f"domain lengths must satisfy L1 >= L2, got {lengths}")
        n1, n2 = _cells_for(lengths[0], h), _cells_for(lengths[1], h)
        x = np.arange(n1 + 1, dtype=float) * h
        y = np.arange(n2 + 1, dtype=float) * h
        xx, yy = np.meshgrid(x, y)  # row-major: x fastest
        coords = np.column_stack([xx.ravel(), yy.ravel()])
        ii, jj = np.meshgrid(np.arange(n1), np.arange(n2))
        a = (ii + jj * (n1 + 1)).ravel()
        b, c, d = a + 1, a + n1 + 2, a + n1 + 1
        # both triangles share the a-c diagonal
        elements = np.vstack([
            np.column_stack([a, b, c]),
            np.column_stack([a, c, d]),
        ]).astype(np.int32)
        volume = 0.5 * h * h
    else:
        raise ConfigurationError(f"dimension must be 1 or 2, got {dim}")

    lumped = np.zeros(coords.shape[0])
    np.add.at(lumped, elements.ravel(), volume / (dim + 1))
    return StructuredMesh(
        dim=dim, lengths=lengths, cells=(n1,) if dim == 1 else (n1, n2),
        h=float(h), coords=coords, elements=elements, lumped=lumped,
        element_volume=volume,
    )


# ---------------------------------------------------------------------------
# P1 assembly
# ---------------------------------------------------------------------------

_geometry_cache: "weakref.WeakKeyDictionary[StructuredMesh, tuple]" = weakref.WeakKeyDictionary()
_stiffness_cache: "weakref.WeakKeyDictionary[StructuredMesh, sparse.csr_matrix]" = weakref.WeakKeyDictionary()


def element_stiffness(mesh: StructuredMesh):
    """Per-element local stiffness blocks and their global (row, col) indices.

    Returns ``(rows, cols, local)`` with ``local`` of shape
    (n_elements, nv, nv) holding volume * grad(lambda_i) . grad(lambda_j).
    """
    cached = _geometry_cache.get(mesh)
    if cached is not None:
        return cached

    elems = mesh.elements
    if mesh.dim == 1:
        base = np.array([[1.0, -1.0], [-1.0, 1.0]]) / mesh.h
        local = np.broadcast_to(base, (mesh.n_elements, 2, 2))
    else:
        pts = mesh.coords[elems]                      # (n_el, 3, 2)
        e1 = pts[:, 1] - pts[:, 0]
        e2 = pts[:, 2] - pts[:, 0]
        det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        area = 0.5 * np.abs(det)
        # gradients of the barycentric coordinates
        grads = np.empty((mesh.n_elements, 3, 2))
        grads[:, 1, 0] = e2[:, 1] / det
        grads[:, 1, 1] = -e2[:, 0] / det
        grads[:, 2, 0] = -e1[:, 1] / det
        grads[:, 2, 1] = e1[:, 0] / det
        grads[:, 0] = -grads[:, 1] - grads[:, 2]
        local = np.einsum("eid,ejd->eij", grads, grads) * area[:, None, None]

    nv = elems.shape[1]
    rows = np.repeat(elems, nv, axis=1).ravel()
    cols = np.tile(elems, (1, nv)).ravel()
    out = (rows, cols, np.ascontiguousarray(local))
    _geometry_cache[mesh] = out
    return out


def stiffness_matrix(mesh: StructuredMesh, coeff: np.ndarray | None = None) -> sparse.csr_matrix:
    """Assembled P1 stiffness matrix, optionally weighted per element.

    ``coeff`` is a per-element scalar (e.g. an averaged mobility); ``None``
    assembles the plain Laplacian stiffness, which is cached per mesh.
    """
    if coeff is None:
        cached = _stiffness_cache.get(mesh)
        if cached is not None:
            return cached
    rows, cols, local = element_stiffness(mesh)
    data = local if coeff is None else local * np.asarray(coeff)[:, None, None]
    mat = sparse.coo_matrix(
        (data.ravel(), (rows, cols)), shape=(mesh.n_nodes, mesh.n_nodes)
    ).tocsr()
    if coeff is None:
        _stiffness_cache[mesh] = mat
    return mat


def element_means(mesh: StructuredMesh, values: np.ndarray) -> np.ndarray:
    """Arithmetic mean of nodal values over each element's vertices."""
    return values[mesh.elements].mean(axis=1)
