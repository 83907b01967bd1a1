"""Small helpers for real and complex 4x4 matrices (numpy-backed)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrixError

__all__ = [
    "offdiag", "J1", "J2", "commutator", "sup_norm",
    "det_inv_trace", "QuadricCheck", "quadric_check",
]


def offdiag(a, b, c, d):
    """Anti-diagonal matrix with entries a, b, c, d read from the top row
    down, i.e. positions (1,4), (2,3), (3,2), (4,1)."""
    M = np.zeros((4, 4))
    M[0, 3] = a
    M[1, 2] = b
    M[2, 1] = c
    M[3, 0] = d
    return M


# Anti-diagonal quadrics attached to the two Gauss map constructions.
J1 = offdiag(1.0, 1.0, 1.0, 1.0)
J2 = offdiag(1.0, -1.0, -1.0, 1.0)
J1.setflags(write=False)
J2.setflags(write=False)


def commutator(A, B):
    A = np.asarray(A)
    B = np.asarray(B)
    return A @ B - B @ A


def sup_norm(M):
    """Largest entry magnitude (works for batched arrays too)."""
    M = np.asarray(M)
    return float(np.abs(M).max()) if M.size else 0.0


def det_inv_trace(M, threshold=1e-12):
    """Determinant, inverse, and trace of a 4x4 matrix.

    Raises SingularMatrixError when |det| <= threshold.
    """
    M = np.asarray(M)
    det = np.linalg.det(M)
    if abs(det) <= threshold:
        raise SingularMatrixError(f"matrix is singular to threshold (|det| = {abs(det):.3e})")
    return det, np.linalg.inv(M), np.trace(M)


@dataclass(frozen=True)
class QuadricCheck:
    symmetric: bool
    unit_det: bool
    degenerate: bool
    signature: tuple[int, int] | None  # (positive, negative) eigenvalue counts


def quadric_check(M, tol=1e-9):
    """Check membership in the quadric space: symmetric, det 1, signature (2,2).

    The signature is counted from the eigenvalues of the symmetrized matrix;
    if any eigenvalue sits within tol of zero the signature is undefined and
    the result is flagged degenerate (signature None).
    """
    M = np.asarray(M, dtype=float)
    sym_dev = sup_norm(M - M.T)
    scale = 1.0 + sup_norm(M)
    symmetric = bool(sym_dev <= tol * scale)
    unit_det = bool(abs(np.linalg.det(M) - 1.0) <= tol * scale ** 4)
    eigs = np.linalg.eigvalsh(0.5 * (M + M.T))
    degenerate = bool(np.any(np.abs(eigs) <= tol))
    signature = None
    if not degenerate:
        signature = (int(np.sum(eigs > 0)), int(np.sum(eigs < 0)))
    return QuadricCheck(symmetric=symmetric, unit_det=unit_det,
                        degenerate=degenerate, signature=signature)
