"""Hot numerical kernels with two interchangeable backends.

The default backend compiles the step loops with numba (`@njit`, cached to
disk so the compile cost is paid once per machine).  Setting the environment
variable DEMOULIN_NO_NUMBA to a non-empty value other than "0" before import,
or running on a machine without numba, selects the pure-numpy fallback, which
vectorizes over the batch axis instead.  Both implementations are exposed for
the benchmark script and for cross-checking in tests; results agree to
rounding.

Kernels:
  rk4_flow          classical RK4 transport of frames F' = F A(t) along a
                    sampled path, batched over independent paths
  mc_residual_max   sup-norm of the Maurer-Cartan residual over a batch of
                    stencil samples
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("DEMOULIN_NO_NUMBA", "0").strip() not in ("", "0")

HAVE_NUMBA = False
if not _DISABLED:
    try:
        from numba import njit

        HAVE_NUMBA = True
    except ImportError:
        HAVE_NUMBA = False

USING_NUMBA = HAVE_NUMBA


def _mm4(X, Y, out):
    # fixed-size product; explicit loops beat the generic matmul dispatch
    # by an order of magnitude on 4x4 operands under the compiler
    for i in range(4):
        for j in range(4):
            acc = 0.0
            for l in range(4):
                acc += X[i, l] * Y[l, j]
            out[i, j] = acc


def _rk4_flow_impl(F0, A, h, stride):
    # F0: (m,4,4) initial frames.  A: (m, 2n+1, 4, 4) connection samples at
    # spacing h/2 (endpoints and midpoints of the n steps).  Returns frames
    # at every `stride`-th step, shape (m, n//stride + 1, 4, 4).
    m = F0.shape[0]
    nsteps = (A.shape[1] - 1) // 2
    nout = nsteps // stride + 1
    out = np.empty((m, nout, 4, 4))
    T = np.empty((4, 4))
    k1 = np.empty((4, 4))
    k2 = np.empty((4, 4))
    k3 = np.empty((4, 4))
    k4 = np.empty((4, 4))
    for c in range(m):
        F = F0[c].copy()
        out[c, 0] = F
        for s in range(nsteps):
            A0 = A[c, 2 * s]
            A1 = A[c, 2 * s + 1]
            A2 = A[c, 2 * s + 2]
            _mm4(F, A0, k1)
            for i in range(4):
                for j in range(4):
                    T[i, j] = F[i, j] + 0.5 * h * k1[i, j]
            _mm4(T, A1, k2)
            for i in range(4):
                for j in range(4):
                    T[i, j] = F[i, j] + 0.5 * h * k2[i, j]
            _mm4(T, A1, k3)
            for i in range(4):
                for j in range(4):
                    T[i, j] = F[i, j] + h * k3[i, j]
            _mm4(T, A2, k4)
            for i in range(4):
                for j in range(4):
                    F[i, j] += (h / 6.0) * (k1[i, j] + 2.0 * k2[i, j]
                                            + 2.0 * k3[i, j] + k4[i, j])
            if (s + 1) % stride == 0:
                out[c, (s + 1) // stride] = F
    return out


def _rk4_flow_numpy(F0, A, h, stride):
    # Same scheme, vectorized over the batch axis.
    m = F0.shape[0]
    nsteps = (A.shape[1] - 1) // 2
    nout = nsteps // stride + 1
    out = np.empty((m, nout, 4, 4))
    F = F0.copy()
    out[:, 0] = F
    for s in range(nsteps):
        A0 = A[:, 2 * s]
        A1 = A[:, 2 * s + 1]
        A2 = A[:, 2 * s + 2]
        k1 = F @ A0
        k2 = (F + 0.5 * h * k1) @ A1
        k3 = (F + 0.5 * h * k2) @ A1
        k4 = (F + h * k3) @ A2
        F = F + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (s + 1) % stride == 0:
            out[:, (s + 1) // stride] = F
    return out


def _mc_residual_max_numpy(Uc, Vc, Uyp, Uym, Vxp, Vxm, h):
    R = (Uyp - Uym) / (2.0 * h) - (Vxp - Vxm) / (2.0 * h) - (Uc @ Vc - Vc @ Uc)
    return np.abs(R).reshape(R.shape[0], -1).max(axis=1)


if HAVE_NUMBA:
    _mm4 = njit(inline="always")(_mm4)
    _rk4_flow_numba = njit(cache=True)(_rk4_flow_impl)

    @njit(cache=True)
    def _mc_residual_max_numba(Uc, Vc, Uyp, Uym, Vxp, Vxm, h):
        n = Uc.shape[0]
        out = np.empty(n)
        inv2h = 1.0 / (2.0 * h)
        for p in range(n):
            best = 0.0
            for i in range(4):
                for j in range(4):
                    comm = 0.0
                    for l in range(4):
                        comm += (Uc[p, i, l] * Vc[p, l, j]
                                 - Vc[p, i, l] * Uc[p, l, j])
                    r = ((Uyp[p, i, j] - Uym[p, i, j]) * inv2h
                         - (Vxp[p, i, j] - Vxm[p, i, j]) * inv2h - comm)
                    if r < 0.0:
                        r = -r
                    if r > best:
                        best = r
            out[p] = best
        return out


def rk4_flow(F0, A, h, stride=1):
    """Transport frames along sampled paths; see module docstring."""
    F0 = np.ascontiguousarray(F0, dtype=float)
    A = np.ascontiguousarray(A, dtype=float)
    if USING_NUMBA:
        return _rk4_flow_numba(F0, A, float(h), int(stride))
    return _rk4_flow_numpy(F0, A, float(h), int(stride))


def mc_residual_max(Uc, Vc, Uyp, Uym, Vxp, Vxm, h):
    """Per-point sup norm of dU/dy - dV/dx - [U, V] from stencil samples."""
    arrs = [np.ascontiguousarray(a) for a in (Uc, Vc, Uyp, Uym, Vxp, Vxm)]
    if USING_NUMBA:
        return _mc_residual_max_numba(*arrs, float(h))
    return _mc_residual_max_numpy(*arrs, float(h))


def warmup():
    """Trigger JIT compilation on tiny inputs so later timings are steady state."""
    F0 = np.eye(4)[None]
    A = np.zeros((1, 3, 4, 4))
    rk4_flow(F0, A, 0.1, 1)
    Z = np.zeros((1, 4, 4))
    mc_residual_max(Z, Z, Z, Z, Z, Z, 1e-4)
