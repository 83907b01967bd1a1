"""Twisted extensions of the frame connection and their symmetry algebra.

Three automorphisms of sl(4) drive everything here (J1, J2 are the
anti-diagonal quadrics from `linalg`, eps = exp(2 pi i / 3)):

    tau1(X)  = -J1 X^T J1          involution; fixed space k1, anti space p1
    tau2(X)  = -J2 X^T J2          involution; fixed space k2, anti space p2
    sigma(X) = E X E^{-1}          order three, E = diag(1, eps^2, eps, 1)
    kappa    = tau1 . sigma        order exactly six

Spectral-parameter families: splitting U = U_k + U_p and V = V_k + V_p along
a twisting tau and inserting a nonzero lambda,

    U(lam) = U_k + lam^{-1} U_p,       V(lam) = V_k + lam V_p,

reproduces the connection at lam = 1.  Flatness of the whole family encodes
the surface class: for tau2 it holds iff the surface is projective minimal,
for tau1 iff it is Demoulin or a projective-minimal coincidence surface.

kappa eigenspace convention: g_j is the (-eps)^j eigenspace, j = 0..5, with
(-eps) a primitive sixth root of unity.  Calibration examples (verified in
tests): e21 + e43 lies in g_{-1} = g_5 and e12 + e34 lies in g_1.  A Demoulin
connection is primitive: the lambda-free parts lie in g_0, the lam^{-1} part
of U in g_{-1}, and the lam part of V in g_1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, NotDemoulinError
from .frame import connection_matrices
from .linalg import J1, J2, sup_norm
from .surface import invariants_grid

__all__ = [
    "EPS", "E_MATRIX", "tau1", "tau2", "sigma", "kappa",
    "eigenprojection", "KappaGrading", "sl4_basis",
    "LoopConnectionPair", "loop_connection", "flatness_scan",
    "twisted_symmetry_residual", "primitivity_leakage", "primitivity_check",
    "GaugeReadback", "gauge_transform",
]

EPS = np.exp(2j * np.pi / 3.0)
E_MATRIX = np.diag([1.0 + 0j, EPS ** 2, EPS, 1.0 + 0j])
_E_INV = np.diag([1.0 + 0j, EPS, EPS ** 2, 1.0 + 0j])

AUTOMORPHISMS = ("tau1", "tau2", "sigma", "kappa")
TWISTINGS = ("tau1", "tau2")


def tau1(X):
    X = np.asarray(X)
    return -J1 @ np.swapaxes(X, -1, -2) @ J1


def tau2(X):
    X = np.asarray(X)
    return -J2 @ np.swapaxes(X, -1, -2) @ J2


def sigma(X):
    return E_MATRIX @ np.asarray(X, dtype=complex) @ _E_INV


def kappa(X):
    X = np.asarray(X, dtype=complex)
    return -J1 @ _E_INV @ np.swapaxes(X, -1, -2) @ E_MATRIX @ J1


def _check_traceless(X):
    tr = np.trace(np.asarray(X), axis1=-2, axis2=-1)
    if np.any(np.abs(tr) > 1e-10 * (1.0 + np.abs(X).max())):
        raise ValueError("eigenprojection requires a trace-free matrix")


def eigenprojection(X, automorphism):
    """Decompose X along the eigenspaces of one automorphism.

    Returns a list of components (summing to X):
      tau1/tau2: [fixed part, anti part]            (eigenvalues +1, -1)
      sigma:     [X_0, X_1, X_2]                    (eigenvalues eps^j)
      kappa:     [X_0, ..., X_5]                    (eigenvalues (-eps)^j)
    """
    _check_traceless(X)
    if automorphism == "tau1":
        T = tau1(X)
        return [(X + T) / 2.0, (X - T) / 2.0]
    if automorphism == "tau2":
        T = tau2(X)
        return [(X + T) / 2.0, (X - T) / 2.0]
    if automorphism == "sigma":
        powers = [np.asarray(X, dtype=complex)]
        for _ in range(2):
            powers.append(sigma(powers[-1]))
        return [sum(EPS ** (-j * m) * powers[m] for m in range(3)) / 3.0
                for j in range(3)]
    if automorphism == "kappa":
        powers = [np.asarray(X, dtype=complex)]
        for _ in range(5):
            powers.append(kappa(powers[-1]))
        w = -EPS
        return [sum(w ** (-j * m) * powers[m] for m in range(6)) / 6.0
                for j in range(6)]
    raise ValueError(f"automorphism must be one of {AUTOMORPHISMS}")


class KappaGrading:
    """The six projectors of the kappa eigenspace decomposition of sl(4, C).

    component(X, j) projects onto g_j, the (-eps)^j eigenspace.  Projectors
    are idempotent and complete; [g_i, g_j] lands in g_{(i+j) mod 6}.
    """

    order = 6
    eigenvalue_base = -EPS

    def components(self, X):
        return eigenprojection(X, "kappa")

    def component(self, X, j):
        return self.components(X)[j % 6]

    def leakage(self, X, j):
        """Sup norm of X outside g_j."""
        comps = self.components(X)
        return max(sup_norm(comps[m]) for m in range(6) if m != j % 6)


def sl4_basis():
    """15 trace-free generators: the 12 off-diagonal units and 3 diagonal
    differences."""
    basis = []
    for i in range(4):
        for j in range(4):
            if i != j:
                M = np.zeros((4, 4))
                M[i, j] = 1.0
                basis.append(M)
    for i in range(3):
        M = np.zeros((4, 4))
        M[i, i] = 1.0
        M[i + 1, i + 1] = -1.0
        basis.append(M)
    return basis


# ---------------------------------------------------------------------------
# spectral families

def _loop_matrices(jet, lam, kind):
    """Entrywise lambda insertion (broadcasts over array jets).

    tau1 scales every off-diagonal entry: U by lam^{-1}, V by lam.
    tau2 touches only the anti part: U(1,4), U(3,2) by lam^{-1} and
    V(1,4), V(2,3) by lam.
    """
    if kind not in TWISTINGS:
        raise ValueError(f"twisting must be one of {TWISTINGS}, got {kind!r}")
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    U, V = connection_matrices(jet)
    dtype = complex if isinstance(lam, complex) else float
    U = U.astype(dtype)
    V = V.astype(dtype)
    if kind == "tau1":
        eye = np.eye(4, dtype=dtype)
        Ud = U * eye
        Vd = V * eye
        return Ud + (U - Ud) / lam, Vd + (V - Vd) * lam
    U[..., 0, 3] /= lam
    U[..., 2, 1] /= lam
    V[..., 0, 3] *= lam
    V[..., 1, 2] *= lam
    return U, V


@dataclass(frozen=True)
class LoopConnectionPair:
    x: float
    y: float
    lam: complex
    twisting: str
    U: np.ndarray
    V: np.ndarray


def loop_connection(jet, lam, twisting):
    """Spectral-parameter connection at one jet, built twice (entrywise
    insertion and eigenspace split) and cross-checked to 1e-12."""
    U1, V1 = _loop_matrices(jet, lam, twisting)
    U, V = connection_matrices(jet)
    Uk, Up = eigenprojection(U, twisting)
    Vk, Vp = eigenprojection(V, twisting)
    U2 = Uk + Up / lam
    V2 = Vk + Vp * lam
    dev = max(sup_norm(U1 - U2), sup_norm(V1 - V2))
    scale = 1.0 + max(sup_norm(U1), sup_norm(V1))
    if not (dev <= 1e-12 * scale):
        raise ConsistencyError(
            f"loop connection routes disagree by {dev:.3e} (twisting {twisting})")
    return LoopConnectionPair(x=jet.x, y=jet.y, lam=lam, twisting=twisting,
                              U=U1, V=V1)


def flatness_scan(spec, twisting, lambda_set=None, grid=None, h=1e-4):
    """Sup norm of the Maurer-Cartan residual of the lambda-family over the
    interior grid nodes, for each real nonzero lambda in the set.

    Returns {lambda: residual}.  Derivative terms are central differences
    with step h; interior nodes keep the stencil inside the domain.
    """
    lams = tuple(spec.lambda_samples if lambda_set is None else lambda_set)
    for lam in lams:
        if lam == 0 or isinstance(lam, complex):
            raise ValueError("flatness scan wants real nonzero lambda values")
    nx, ny = grid if grid is not None else spec.grid
    (x0, x1), (y0, y1) = spec.domain
    xs = np.linspace(x0, x1, nx)[1:-1]
    ys = np.linspace(y0, y1, ny)[1:-1]
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    X = X.ravel()
    Y = Y.ravel()
    jets = {
        "c": invariants_grid(spec, X, Y),
        "n": invariants_grid(spec, X, Y + h),
        "s": invariants_grid(spec, X, Y - h),
        "e": invariants_grid(spec, X + h, Y),
        "w": invariants_grid(spec, X - h, Y),
    }
    from ._kernels import mc_residual_max

    out = {}
    for lam in lams:
        Uc, Vc = _loop_matrices(jets["c"], lam, twisting)
        Uyp = _loop_matrices(jets["n"], lam, twisting)[0]
        Uym = _loop_matrices(jets["s"], lam, twisting)[0]
        Vxp = _loop_matrices(jets["e"], lam, twisting)[1]
        Vxm = _loop_matrices(jets["w"], lam, twisting)[1]
        res = mc_residual_max(Uc, Vc, Uyp, Uym, Vxp, Vxm, h)
        out[float(lam)] = float(res.max())
    return out


def twisted_symmetry_residual(jet, lam, demoulin_tol=1e-9):
    """Order-six symmetry defect of the tau1 family at a Demoulin jet:
    sup norm of kappa(A(lam)) - A(-eps lam) over A in {U, V}.

    Jets with max(|P|, |Q|) > demoulin_tol are rejected, since the symmetry
    only holds on the Demoulin locus.
    """
    if max(abs(jet.P), abs(jet.Q)) > demoulin_tol:
        raise NotDemoulinError(
            f"twisted symmetry needs P = Q = 0; got P = {jet.P}, Q = {jet.Q}")
    lam = complex(lam)
    U1, V1 = _loop_matrices(jet, lam, "tau1")
    U2, V2 = _loop_matrices(jet, -EPS * lam, "tau1")
    return max(sup_norm(kappa(U1) - U2), sup_norm(kappa(V1) - V2))


def primitivity_leakage(jet):
    """How far the tau1 family sits from the primitive grading: the largest
    kappa component outside g_0 for the lambda-free parts, outside g_{-1}
    for the lam^{-1} part of U, outside g_1 for the lam part of V."""
    U, V = connection_matrices(jet)
    Uk, Up = eigenprojection(U, "tau1")
    Vk, Vp = eigenprojection(V, "tau1")
    grading = KappaGrading()
    return max(
        grading.leakage(Uk, 0),
        grading.leakage(Up, 5),   # g_{-1} = g_5
        grading.leakage(Vk, 0),
        grading.leakage(Vp, 1),
    )


def primitivity_check(jet, tol=1e-9):
    return primitivity_leakage(jet) <= tol


# ---------------------------------------------------------------------------
# gauge transform

@dataclass(frozen=True)
class GaugeReadback:
    lam: float
    U: np.ndarray
    V: np.ndarray
    b: float
    c: float
    k: float
    ell: float
    P: float
    Q: float


def gauge_transform(pair):
    """Conjugate a tau1 family member by diag(1, lam, 1/lam, 1).

    The result is again a connection pair in canonical shape; the carried
    data transform as b -> lam^-3 b, c -> lam^3 c, P -> lam^-2 P,
    Q -> lam^2 Q with k, l and the product bc untouched.  The canonical
    sparsity of the result is verified entry by entry; violation means an
    implementation bug.
    """
    if pair.twisting != "tau1":
        raise ValueError("gauge transform is defined for the tau1 twisting")
    lam = pair.lam
    if isinstance(lam, complex):
        if abs(lam.imag) > 1e-14 * (1.0 + abs(lam.real)):
            raise ValueError("gauge transform wants a real lambda")
        lam = lam.real
    lam = float(lam)
    D = np.diag([1.0, lam, 1.0 / lam, 1.0])
    Dinv = np.diag([1.0, 1.0 / lam, lam, 1.0])
    U = np.real_if_close(D @ np.asarray(pair.U) @ Dinv, tol=1000)
    V = np.real_if_close(D @ np.asarray(pair.V) @ Dinv, tol=1000)
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)

    tol = 1e-12 * (1.0 + max(sup_norm(U), sup_norm(V)))

    def expect(cond, what):
        if not cond:
            raise ConsistencyError(f"gauge transform broke canonical shape: {what}")

    for (i, j) in ((2, 0), (3, 0), (3, 1), (1, 2)):
        expect(abs(U[i, j]) <= tol, f"U[{i},{j}] != 0")
    for (i, j) in ((1, 0), (3, 0), (2, 1), (3, 2)):
        expect(abs(V[i, j]) <= tol, f"V[{i},{j}] != 0")
    expect(abs(U[1, 0] - 1.0) <= tol and abs(U[3, 2] - 1.0) <= tol, "U unit entries")
    expect(abs(V[2, 0] - 1.0) <= tol and abs(V[3, 1] - 1.0) <= tol, "V unit entries")
    expect(abs(U[0, 0] + U[1, 1]) <= tol and abs(U[0, 0] - U[2, 2]) <= tol
           and abs(U[2, 2] + U[3, 3]) <= tol, "U diagonal pattern")
    expect(abs(V[0, 0] - V[1, 1]) <= tol and abs(V[0, 0] + V[2, 2]) <= tol
           and abs(V[1, 1] + V[3, 3]) <= tol, "V diagonal pattern")
    expect(abs(U[0, 2] - U[1, 3]) <= tol, "U k entries")
    expect(abs(U[0, 1] - U[2, 3]) <= tol, "U P entries")
    expect(abs(V[0, 1] - V[2, 3]) <= tol, "V l entries")
    expect(abs(V[0, 2] - V[1, 3]) <= tol, "V Q entries")

    b = U[2, 1]
    c = V[1, 2]
    P = U[0, 1]
    Q = V[0, 2]
    expect(abs(U[0, 3] - b * Q) <= tol * (1.0 + abs(b * Q)), "U corner = bQ")
    expect(abs(V[0, 3] - c * P) <= tol * (1.0 + abs(c * P)), "V corner = cP")
    return GaugeReadback(lam=lam, U=U, V=V, b=b, c=c,
                         k=U[0, 2], ell=V[0, 1], P=P, Q=Q)
