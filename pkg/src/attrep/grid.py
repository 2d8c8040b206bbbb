"""Cell-centered fields on the rectangle and the discrete operators on them.

Discretization notes, shared by everything downstream:

* values live at cell centers x_i = (i + 1/2) h, so the grid never places a
  point on the boundary;
* zero-flux boundaries are realized by reflected ghost cells (ghost value
  equals the adjacent interior value), which makes boundary face differences
  vanish identically;
* the five-point Laplacian built this way is symmetric, sums to zero against
  the constant, and has the shifted cosine modes cos(k pi x / Lx) as exact
  eigenvectors with eigenvalue -(2/h^2)(1 - cos(pi k h / Lx)) per axis.

Reductions use numpy's pairwise summation in a fixed array order, so repeated
calls on the same field are bitwise reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NegativeFieldWithFractionalPower, NonFiniteField
from .model import DomainSpec


@dataclass(frozen=True)
class Field:
    """Immutable scalar field sampled at cell centers, shape (Nx, Ny).

    Construction freezes the given array in place (writeable flag cleared);
    pass a copy if the caller needs to keep mutating its buffer.
    """

    values: np.ndarray
    domain: DomainSpec

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != tuple(self.domain.cells):
            raise ValueError(
                f"field shape {values.shape} does not match domain cells {self.domain.cells}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def full(cls, dom: DomainSpec, value: float) -> "Field":
        return cls(np.full(dom.cells, float(value)), dom)

    @property
    def h(self) -> float:
        return self.domain.h


def require_finite(field: Field, what: str = "field") -> None:
    if not np.isfinite(field.values).all():
        raise NonFiniteField(f"{what} contains NaN or Inf")


def integrate(field: Field) -> float:
    """Midpoint quadrature: h^2 * sum of cell values."""
    require_finite(field)
    h = field.h
    return float(field.values.sum()) * h * h


def lp_norm_p(field: Field, p: float) -> float:
    """Integral of |f|^p (no 1/p root), for p >= 1.

    Non-integer p requires a nonnegative field; |f|^p with fractional p and
    negative values would silently leave the reals.
    """
    require_finite(field)
    p = float(p)
    if p < 1.0:
        raise ValueError(f"lp_norm_p needs p >= 1, got {p}")
    values = field.values
    if not p.is_integer() and values.min() < 0.0:
        raise NegativeFieldWithFractionalPower(
            f"field has min {values.min()} < 0 with fractional p = {p}"
        )
    h = field.h
    if p == 1.0:
        total = np.abs(values).sum()
    elif p == 2.0:
        total = (values * values).sum()
    else:
        total = np.power(np.abs(values), p).sum()
    return float(total) * h * h


def grad_energy(field: Field) -> float:
    """Integral of |grad f|^2 from two-point face differences.

    Each interior face contributes (difference / h)^2 * h^2; boundary faces
    contribute exactly zero by the reflected-ghost convention. For fields
    compatible with the zero-flux boundary this is second-order accurate;
    otherwise it under-counts a boundary strip of width h/2.
    """
    require_finite(field)
    v = field.values
    # (diff / h)^2 * h^2 == diff^2, so h cancels out of the face sum.
    gx = v[1:, :] - v[:-1, :]
    gy = v[:, 1:] - v[:, :-1]
    return float((gx * gx).sum() + (gy * gy).sum())


def neumann_laplacian_apply(field: Field) -> Field:
    """Five-point Laplacian with reflected ghost cells (zero-flux exact)."""
    require_finite(field)
    v = field.values
    h = field.h
    padded = np.pad(v, 1, mode="edge")
    lap = (
        padded[:-2, 1:-1]
        + padded[2:, 1:-1]
        + padded[1:-1, :-2]
        + padded[1:-1, 2:]
        - 4.0 * v
    ) / (h * h)
    return Field(lap, field.domain)


def write_field_csv(field: Field, path) -> None:
    """Snapshot format: header x,y,value then one row per cell, row-major in
    (x, y), 17 significant digits."""
    x, y = field.domain.cell_centers()
    xx, yy = np.meshgrid(x, y, indexing="ij")
    table = np.column_stack([xx.ravel(), yy.ravel(), field.values.ravel()])
    np.savetxt(path, table, fmt="%.17g", delimiter=",", header="x,y,value", comments="")


def read_field_csv(path, dom: DomainSpec) -> Field:
    """Read a snapshot written by write_field_csv back onto `dom`.

    The row count must match the domain and the corner coordinates must agree
    with the cell centers; ordering is trusted to be row-major.
    """
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    nx, ny = dom.cells
    if table.shape[0] != nx * ny or table.shape[1] != 3:
        raise ValueError(
            f"snapshot {path!r} has shape {table.shape}, expected ({nx * ny}, 3) for {dom.cells}"
        )
    h = dom.h
    tol = 1e-9 * max(dom.lengths)
    expect_first = (0.5 * h, 0.5 * h)
    expect_last = (dom.lengths[0] - 0.5 * h, dom.lengths[1] - 0.5 * h)
    if (
        abs(table[0, 0] - expect_first[0]) > tol
        or abs(table[0, 1] - expect_first[1]) > tol
        or abs(table[-1, 0] - expect_last[0]) > tol
        or abs(table[-1, 1] - expect_last[1]) > tol
    ):
        raise ValueError(f"snapshot {path!r} coordinates do not match the domain cell centers")
    return Field(table[:, 2].reshape(nx, ny), dom)
