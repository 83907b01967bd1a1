"""Quadric-valued Gauss maps built from unimodular frames.

Both maps send a frame F to a symmetric unit-determinant matrix of signature
(2,2), i.e. a point of the quadric space:

    first_order:  g = F J1 F^T       J1 = offdiag(1, 1, 1, 1)
    conformal:    g = F J2 F^T       J2 = offdiag(1, -1, -1, 1)

Tangent vectors at g are measured with <X, Y>_g = tr(g^-1 X g^-1 Y).  The
coordinate derivatives of the maps have closed forms in the frame and the
invariant jet (no differencing), and their inner products collapse to
scalars of the jet:

    first_order:  (<gx,gx>, <gy,gy>, <gx,gy>) = (16P, 16Q, 8(k+l) + 4bc)
    conformal:    (0, 0, 4bc)

so the first-order map is conformal exactly on Demoulin patches and the
conformal map always is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, NonUnimodularFrameError, SingularMatrixError
from .frame import advance_frame, frame_at
from .linalg import J1, J2

__all__ = [
    "Quadric", "gauss_map", "inner_product", "derivative_core",
    "gauss_derivatives_closed_form", "ConformalityDiagnostics",
    "conformality_diagnostics", "conformality_closed_form",
    "conformality_field", "gauss_derivatives_fd",
]

KINDS = ("first_order", "conformal")


def _quadric_j(kind):
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    return J1 if kind == "first_order" else J2


@dataclass(frozen=True)
class Quadric:
    M: np.ndarray
    kind: str
    point: tuple[float, float] | None = None


def gauss_map(F, kind, point=None, det_tol=1e-6):
    """Image of a frame under the chosen Gauss map.

    The frame must be unimodular to det_tol; integrated frames drift a
    little, so the default is looser than machine precision.
    """
    F = np.asarray(F, dtype=float)
    J = _quadric_j(kind)
    det = np.linalg.det(F)
    if not (abs(det - 1.0) <= det_tol):
        raise NonUnimodularFrameError(f"det F = {det} is not 1 to {det_tol}")
    return Quadric(M=F @ J @ F.T, kind=kind, point=point)


def inner_product(p, X, Y):
    """Trace form tr(p^-1 X p^-1 Y) at the base point p."""
    p = np.asarray(p, dtype=float)
    if abs(np.linalg.det(p)) <= 1e-12:
        raise SingularMatrixError("base point matrix is singular")
    pinvX = np.linalg.solve(p, np.asarray(X, dtype=float))
    pinvY = np.linalg.solve(p, np.asarray(Y, dtype=float))
    return float(np.trace(pinvX @ pinvY))


def derivative_core(jet, kind):
    """The jet-dependent symmetric matrices Mx, My with g_x = 2 F Mx F^T and
    g_y = 2 F My F^T.  Broadcasts over array jets."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    b = np.asarray(jet.b, dtype=float)
    shape = b.shape
    Mx = np.zeros(shape + (4, 4))
    My = np.zeros(shape + (4, 4))
    if kind == "first_order":
        Mx[..., 0, 0] = jet.b * jet.Q
        Mx[..., 0, 1] = Mx[..., 1, 0] = jet.k
        Mx[..., 0, 2] = Mx[..., 2, 0] = jet.P
        Mx[..., 1, 3] = Mx[..., 3, 1] = 1.0
        Mx[..., 2, 2] = jet.b
        My[..., 0, 0] = jet.c * jet.P
        My[..., 0, 1] = My[..., 1, 0] = jet.Q
        My[..., 0, 2] = My[..., 2, 0] = jet.ell
        My[..., 1, 1] = jet.c
        My[..., 2, 3] = My[..., 3, 2] = 1.0
    else:
        Mx[..., 0, 0] = jet.b * jet.Q
        Mx[..., 2, 2] = -jet.b
        My[..., 0, 0] = jet.c * jet.P
        My[..., 1, 1] = -jet.c
    return Mx, My


def gauss_derivatives_closed_form(F, jet, kind):
    F = np.asarray(F, dtype=float)
    Mx, My = derivative_core(jet, kind)
    return 2.0 * F @ Mx @ F.T, 2.0 * F @ My @ F.T


@dataclass(frozen=True)
class ConformalityDiagnostics:
    Exx: float
    Eyy: float
    Exy: float
    closed_form: tuple[float, float, float]
    deviation: float


def conformality_closed_form(jet, kind):
    if kind == "first_order":
        return (16.0 * jet.P, 16.0 * jet.Q,
                8.0 * (jet.k + jet.ell) + 4.0 * jet.b * jet.c)
    bc = 4.0 * jet.b * jet.c
    return (np.zeros_like(bc), np.zeros_like(bc), bc)


def conformality_diagnostics(F, jet, kind, check_tol=1e-8):
    """Inner products of the coordinate derivatives at the mapped point,
    alongside the closed-form prediction.

    The two must agree to check_tol for any unimodular frame; disagreement
    is an internal inconsistency, not bad input.
    """
    g = gauss_map(F, kind, point=(jet.x, jet.y))
    Gx, Gy = gauss_derivatives_closed_form(F, jet, kind)
    Exx = inner_product(g.M, Gx, Gx)
    Eyy = inner_product(g.M, Gy, Gy)
    Exy = inner_product(g.M, Gx, Gy)
    closed = conformality_closed_form(jet, kind)
    dev = max(abs(Exx - closed[0]), abs(Eyy - closed[1]), abs(Exy - closed[2]))
    scale = 1.0 + max(abs(v) for v in closed)
    # written so that a NaN deviation also trips the check
    if not (dev <= check_tol * scale):
        raise ConsistencyError(
            f"conformality diagnostics disagree with closed form by {dev:.3e}")
    return ConformalityDiagnostics(Exx=Exx, Eyy=Eyy, Exy=Exy,
                                   closed_form=closed, deviation=dev)


def conformality_field(frames, jet, kind):
    """Batched diagnostics over an aligned stack of frames and jets.

    Returns (Exx, Eyy, Exy, closed_triple, deviation): the computed inner
    product arrays, the closed-form arrays, and the largest pointwise gap
    between the two.
    """
    F = np.asarray(frames, dtype=float)
    J = _quadric_j(kind)
    Ft = np.swapaxes(F, -1, -2)
    g = F @ J @ Ft
    Mx, My = derivative_core(jet, kind)
    Gx = 2.0 * F @ Mx @ Ft
    Gy = 2.0 * F @ My @ Ft
    ginv = np.linalg.inv(g)

    def ip(A, B):
        return np.einsum("...ij,...ji->...", ginv @ A, ginv @ B)

    Exx = ip(Gx, Gx)
    Eyy = ip(Gy, Gy)
    Exy = ip(Gx, Gy)
    closed = conformality_closed_form(jet, kind)
    dev = max(float(np.abs(Exx - closed[0]).max()),
              float(np.abs(Eyy - closed[1]).max()),
              float(np.abs(Exy - closed[2]).max()))
    return Exx, Eyy, Exy, closed, dev


def gauss_derivatives_fd(spec, x, y, kind, h, F=None, steps=16):
    """Central-difference derivatives of the Gauss map, for cross-checking
    the closed forms.  Frames at the stencil points are transported from a
    shared base frame so path error cancels in the difference."""
    if F is None:
        F = frame_at(spec, x, y)
    J = _quadric_j(kind)

    def g_of(Fp):
        return Fp @ J @ Fp.T

    Fxp = advance_frame(spec, F, x, y, dx=+h, steps=steps)
    Fxm = advance_frame(spec, F, x, y, dx=-h, steps=steps)
    Fyp = advance_frame(spec, F, x, y, dy=+h, steps=steps)
    Fym = advance_frame(spec, F, x, y, dy=-h, steps=steps)
    Gx = (g_of(Fxp) - g_of(Fxm)) / (2.0 * h)
    Gy = (g_of(Fyp) - g_of(Fym)) / (2.0 * h)
    return Gx, Gy
