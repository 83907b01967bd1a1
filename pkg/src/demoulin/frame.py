"""Moving frames attached to the canonical system.

The frame F(x, y) collects the surface lift and its derived vectors as
columns, F = (f, f1, f2, eta), normalized so det F = 1.  It solves the
right-invariant linear system

    F_x = F U,        F_y = F V,

with trace-free connection matrices assembled from the invariant jet:

    U = [[d,  P,  k, bQ],        V = [[e,  l,  Q, cP],
         [1, -d,  0,  k],             [0,  e,  c,  Q],
         [0,  b,  d,  P],             [1,  0, -e,  l],
         [0,  0,  1, -d]]             [0,  1,  0, -e]]

where d = c_x/(2c) and e = b_y/(2b).  Integration is classical RK4 with the
grid step split into `substeps` stages, marching the bottom edge first and
then every column; the heavy loops live in `_kernels`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._kernels import rk4_flow
from .errors import DomainBoundaryError
from .surface import invariants_at, invariants_grid, grid_axes

__all__ = [
    "ConnectionPair", "FrameField", "connection_matrices", "connection_at",
    "mc_residual", "integrate_frame", "frame_at", "advance_frame",
    "path_independence_residual", "determinant_drift",
]


def connection_matrices(jet):
    """Assemble (U, V) from a jet.  Scalar jets give (4, 4) arrays; array
    jets give (..., 4, 4) stacks."""
    b = np.asarray(jet.b, dtype=float)
    shape = b.shape
    d = jet.c_x / (2.0 * jet.c)
    e = jet.b_y / (2.0 * jet.b)
    U = np.zeros(shape + (4, 4))
    V = np.zeros(shape + (4, 4))
    U[..., 0, 0] = d
    U[..., 0, 1] = jet.P
    U[..., 0, 2] = jet.k
    U[..., 0, 3] = jet.b * jet.Q
    U[..., 1, 0] = 1.0
    U[..., 1, 1] = -d
    U[..., 1, 3] = jet.k
    U[..., 2, 1] = jet.b
    U[..., 2, 2] = d
    U[..., 2, 3] = jet.P
    U[..., 3, 2] = 1.0
    U[..., 3, 3] = -d
    V[..., 0, 0] = e
    V[..., 0, 1] = jet.ell
    V[..., 0, 2] = jet.Q
    V[..., 0, 3] = jet.c * jet.P
    V[..., 1, 1] = e
    V[..., 1, 2] = jet.c
    V[..., 1, 3] = jet.Q
    V[..., 2, 0] = 1.0
    V[..., 2, 2] = -e
    V[..., 2, 3] = jet.ell
    V[..., 3, 1] = 1.0
    V[..., 3, 3] = -e
    return U, V


@dataclass(frozen=True)
class ConnectionPair:
    x: float
    y: float
    U: np.ndarray
    V: np.ndarray


def connection_at(spec, x, y):
    U, V = connection_matrices(invariants_at(spec, x, y))
    return ConnectionPair(x=float(x), y=float(y), U=U, V=V)


def _require_inside(spec, x, y):
    (x0, x1), (y0, y1) = spec.domain
    if not (x0 <= x <= x1 and y0 <= y <= y1):
        raise DomainBoundaryError(
            f"point ({x}, {y}) outside domain [{x0}, {x1}] x [{y0}, {y1}]")


def mc_residual(spec, x, y, h=1e-4):
    """Maurer-Cartan residual dU/dy - dV/dx - [U, V] at a point, with the
    derivative terms from central differences of step h.  The whole stencil
    must stay inside the domain."""
    for (xx, yy) in ((x, y + h), (x, y - h), (x + h, y), (x - h, y)):
        _require_inside(spec, xx, yy)
    Uc, Vc = connection_matrices(invariants_at(spec, x, y))
    Uyp, _ = connection_matrices(invariants_at(spec, x, y + h))
    Uym, _ = connection_matrices(invariants_at(spec, x, y - h))
    _, Vxp = connection_matrices(invariants_at(spec, x + h, y))
    _, Vxm = connection_matrices(invariants_at(spec, x - h, y))
    return (Uyp - Uym) / (2.0 * h) - (Vxp - Vxm) / (2.0 * h) - (Uc @ Vc - Vc @ Uc)


@dataclass(frozen=True)
class FrameField:
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray  # (nx, ny, 4, 4)
    base_point: tuple[float, float]
    initial_frame: np.ndarray


def _u_samples_x(spec, y, xa, xb, nsteps):
    ts = np.linspace(xa, xb, 2 * nsteps + 1)
    jet = invariants_grid(spec, ts, np.full_like(ts, y))
    return connection_matrices(jet)[0]


def _v_samples_y(spec, x, ya, yb, nsteps):
    ts = np.linspace(ya, yb, 2 * nsteps + 1)
    jet = invariants_grid(spec, np.full_like(ts, x), ts)
    return connection_matrices(jet)[1]


def integrate_frame(spec, F0=None, substeps=4):
    """Integrate the frame over the whole grid.

    Marches the bottom edge in x from the lower-left corner, then every
    column upward in y, with `substeps` RK4 steps per grid cell.  Returns a
    FrameField holding F at every node.  Emits a warning when the frame
    determinant drifts from 1 by more than 1e-6 anywhere.
    """
    xs, ys = grid_axes(spec)
    nx, ny = len(xs), len(ys)
    F0 = np.eye(4) if F0 is None else np.asarray(F0, dtype=float)
    hx = (xs[-1] - xs[0]) / ((nx - 1) * substeps)
    hy = (ys[-1] - ys[0]) / ((ny - 1) * substeps)

    Ub = _u_samples_x(spec, ys[0], xs[0], xs[-1], (nx - 1) * substeps)
    bottom = rk4_flow(F0[None], Ub[None], hx, substeps)[0]  # (nx, 4, 4)

    tfine = np.linspace(ys[0], ys[-1], 2 * (ny - 1) * substeps + 1)
    jet = invariants_grid(spec, xs[:, None], tfine[None, :])
    Vcols = connection_matrices(jet)[1]  # (nx, 2m+1, 4, 4)
    values = rk4_flow(bottom, Vcols, hy, substeps)  # (nx, ny, 4, 4)

    drift = determinant_drift(values)
    if drift > 1e-6:
        warnings.warn(f"frame determinant drift {drift:.3e} exceeds 1e-6",
                      RuntimeWarning, stacklevel=2)
    return FrameField(xs=xs, ys=ys, values=values,
                      base_point=(float(xs[0]), float(ys[0])), initial_frame=F0)


def determinant_drift(frames):
    return float(np.abs(np.linalg.det(np.asarray(frames)) - 1.0).max())


def advance_frame(spec, F, x, y, dx=0.0, dy=0.0, steps=16):
    """Transport a frame from (x, y) along one axis to (x+dx, y+dy).
    Exactly one of dx, dy may be nonzero; dx = dy = 0 returns F unchanged."""
    if dx != 0.0 and dy != 0.0:
        raise ValueError("advance_frame moves along a single axis")
    F = np.asarray(F, dtype=float)
    if dx == 0.0 and dy == 0.0:
        return F.copy()
    if dx != 0.0:
        A = _u_samples_x(spec, y, x, x + dx, steps)
        h = dx / steps
    else:
        A = _v_samples_y(spec, x, y, y + dy, steps)
        h = dy / steps
    return rk4_flow(F[None], A[None], h, steps)[0, -1]


def frame_at(spec, x, y, F0=None, substeps=4):
    """Frame at an arbitrary point: integrate along the bottom edge to x,
    then up the column to y.  Step size matches the grid cell divided by
    `substeps`, never coarser than the requested leg."""
    _require_inside(spec, x, y)
    xs, ys = grid_axes(spec)
    F = np.eye(4) if F0 is None else np.asarray(F0, dtype=float)
    hx = (xs[1] - xs[0]) / substeps
    hy = (ys[1] - ys[0]) / substeps
    dx = x - xs[0]
    dy = y - ys[0]
    if dx != 0.0:
        F = advance_frame(spec, F, xs[0], ys[0], dx=dx,
                          steps=max(1, int(np.ceil(abs(dx) / hx))))
    if dy != 0.0:
        F = advance_frame(spec, F, x, ys[0], dy=dy,
                          steps=max(1, int(np.ceil(abs(dy) / hy))))
    return F


def path_independence_residual(spec, rect, steps_per_edge=None):
    """Transport the identity frame around the boundary of a rectangle and
    return the sup-norm distance from the identity.

    rect is (x_lo, y_lo, x_hi, y_hi).  For a flat connection (a valid
    surface) the residual shrinks at the integrator's order as
    steps_per_edge grows; a degenerate rectangle gives roundoff.
    """
    x_lo, y_lo, x_hi, y_hi = rect
    for (xx, yy) in ((x_lo, y_lo), (x_hi, y_hi)):
        _require_inside(spec, xx, yy)
    if steps_per_edge is None:
        steps_per_edge = 4 * max(spec.grid)
    n = int(steps_per_edge)

    F = np.eye(4)
    legs = (
        ("x", y_lo, x_lo, x_hi),
        ("y", x_hi, y_lo, y_hi),
        ("x", y_hi, x_hi, x_lo),
        ("y", x_lo, y_hi, y_lo),
    )
    for axis, fixed, a, b in legs:
        if a == b:
            continue
        if axis == "x":
            A = _u_samples_x(spec, fixed, a, b, n)
        else:
            A = _v_samples_y(spec, fixed, a, b, n)
        F = rk4_flow(F[None], A[None], (b - a) / n, n)[0, -1]
    return float(np.abs(F - np.eye(4)).max())
