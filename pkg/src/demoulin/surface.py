"""Surfaces given by the coefficient functions of their canonical system.

A surface patch in projective 3-space with asymptotic coordinates (x, y) is
described by four coefficient functions b, c, p, q of the linear system

    f_xx = b f_y + p f,        f_yy = c f_x + q f.

Everything downstream (frames, Gauss maps, extended connections) is driven
by the second-order data collected in `InvariantJet`:

    k = (bc - (log b)_xy) / 2
    l = (bc - (log c)_xy) / 2
    P = p + b_y/2 - c_xx/(2c) + c_x^2/(4c^2)
    Q = q + c_x/2 - b_yy/(2b) + b_y^2/(4b^2)

All partials entering a jet are exact symbolic derivatives of the coefficient
expressions; no finite differencing happens here.  The derivative trees are
built once per spec and cached.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from functools import lru_cache

import numpy as np

from . import expr
from .errors import DegenerateCoefficientError
from .expr import Call, Const, differentiate, evaluate, evaluate_array

__all__ = [
    "SurfaceSpec", "InvariantJet", "SurfaceClassification",
    "invariants_at", "invariants_grid", "compatibility_residual",
    "classify", "grid_axes",
]

DEFAULT_LAMBDAS = (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0)


@dataclass(frozen=True)
class SurfaceSpec:
    """Immutable description of one verification subject.

    b, c, p, q are expression trees; domain is ((x0, x1), (y0, y1)); grid is
    the scan resolution (nx, ny).  lambda_samples holds the real spectral
    values used by flatness scans.
    """

    name: str
    b: expr.Expr
    c: expr.Expr
    p: expr.Expr
    q: expr.Expr
    domain: tuple[tuple[float, float], tuple[float, float]] = ((0.0, 1.0), (0.0, 1.0))
    grid: tuple[int, int] = (33, 33)
    lambda_samples: tuple[float, ...] = DEFAULT_LAMBDAS
    tolerance: float = 1e-8

    def __post_init__(self):
        (x0, x1), (y0, y1) = self.domain
        if not (x1 > x0 and y1 > y0):
            raise ValueError(f"degenerate domain {self.domain}")
        nx, ny = self.grid
        if nx < 2 or ny < 2:
            raise ValueError(f"grid must be at least 2x2, got {self.grid}")
        if any(lam == 0 for lam in self.lambda_samples):
            raise ValueError("lambda samples must be nonzero")
        if not (self.tolerance > 0):
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True)
class InvariantJet:
    """Coefficient values and the derived invariants at one point (scalars)
    or over an aligned set of points (numpy arrays).

    Capitalized P, Q are the reduced off-diagonal invariants; lowercase p, q
    are the raw coefficients.  fubini_pick is the metric density 8bc; the
    cubic form coefficients are b and c themselves.
    """

    x: float
    y: float
    b: float
    c: float
    p: float
    q: float
    b_x: float
    b_y: float
    b_xy: float
    b_yy: float
    c_x: float
    c_y: float
    c_xx: float
    c_xy: float
    p_y: float
    q_x: float
    k: float
    ell: float
    P: float
    Q: float
    k_y: float
    ell_x: float
    P_x: float
    P_y: float
    Q_x: float
    Q_y: float
    fubini_pick: float


@dataclass(frozen=True)
class _JetProgram:
    b: expr.Expr
    c: expr.Expr
    p: expr.Expr
    q: expr.Expr
    b_x: expr.Expr
    b_y: expr.Expr
    b_xy: expr.Expr
    b_yy: expr.Expr
    c_x: expr.Expr
    c_y: expr.Expr
    c_xx: expr.Expr
    c_xy: expr.Expr
    p_y: expr.Expr
    q_x: expr.Expr
    k: expr.Expr
    ell: expr.Expr
    P: expr.Expr
    Q: expr.Expr
    k_y: expr.Expr
    ell_x: expr.Expr
    P_x: expr.Expr
    P_y: expr.Expr
    Q_x: expr.Expr
    Q_y: expr.Expr


def _half(e):
    return expr._div(e, Const(2.0))


@lru_cache(maxsize=64)
def _jet_program(spec):
    b, c, p, q = spec.b, spec.c, spec.p, spec.q
    b_x = differentiate(b, "x")
    b_y = differentiate(b, "y")
    c_x = differentiate(c, "x")
    c_y = differentiate(c, "y")
    # (log b)_xy survives sign changes of b: the log node disappears after
    # the first differentiation, leaving b_x/b.
    log_b_xy = differentiate(differentiate(Call("log", b), "x"), "y")
    log_c_xy = differentiate(differentiate(Call("log", c), "x"), "y")
    bc = expr._mul(b, c)
    k = _half(expr._sub(bc, log_b_xy))
    ell = _half(expr._sub(bc, log_c_xy))
    c_xx = differentiate(c_x, "x")
    b_yy = differentiate(b_y, "y")
    P = expr._add(
        expr._sub(expr._add(p, _half(b_y)),
                  expr._div(c_xx, expr._mul(Const(2.0), c))),
        expr._div(expr._powi(c_x, 2), expr._mul(Const(4.0), expr._powi(c, 2))))
    Q = expr._add(
        expr._sub(expr._add(q, _half(c_x)),
                  expr._div(b_yy, expr._mul(Const(2.0), b))),
        expr._div(expr._powi(b_y, 2), expr._mul(Const(4.0), expr._powi(b, 2))))
    return _JetProgram(
        b=b, c=c, p=p, q=q,
        b_x=b_x, b_y=b_y, b_xy=differentiate(b_x, "y"), b_yy=b_yy,
        c_x=c_x, c_y=c_y, c_xx=c_xx, c_xy=differentiate(c_x, "y"),
        p_y=differentiate(p, "y"), q_x=differentiate(q, "x"),
        k=k, ell=ell, P=P, Q=Q,
        k_y=differentiate(k, "y"), ell_x=differentiate(ell, "x"),
        P_x=differentiate(P, "x"), P_y=differentiate(P, "y"),
        Q_x=differentiate(Q, "x"), Q_y=differentiate(Q, "y"))


def invariants_at(spec, x, y):
    """Exact invariant jet at one point (strict evaluation).

    Raises DegenerateCoefficientError when |b| or |c| falls to the spec
    tolerance or below (the canonical system needs bc != 0).
    """
    prog = _jet_program(spec)
    # b and c gate the rest: division by either appears throughout the
    # program, so the degeneracy check must run before full evaluation
    bv = evaluate(prog.b, x, y)
    cv = evaluate(prog.c, x, y)
    if abs(bv) <= spec.tolerance or abs(cv) <= spec.tolerance:
        raise DegenerateCoefficientError(
            f"|b| or |c| at tolerance at (x, y) = ({x}, {y}): "
            f"b = {bv:.3e}, c = {cv:.3e}")
    vals = {f.name: evaluate(getattr(prog, f.name), x, y) for f in fields(_JetProgram)}
    return InvariantJet(x=float(x), y=float(y),
                        fubini_pick=8.0 * vals["b"] * vals["c"], **vals)


def invariants_grid(spec, x, y, check=True):
    """Vectorized jet over broadcast arrays of points.

    With check=True, rejects grids containing degenerate or non-finite
    coefficient values.
    """
    prog = _jet_program(spec)
    vals = {f.name: evaluate_array(getattr(prog, f.name), x, y)
            for f in fields(_JetProgram)}
    if check:
        babs = np.abs(vals["b"])
        cabs = np.abs(vals["c"])
        bad = (babs <= spec.tolerance) | (cabs <= spec.tolerance) \
            | ~np.isfinite(vals["b"]) | ~np.isfinite(vals["c"])
        if np.any(bad):
            xb = np.broadcast_to(np.asarray(x, float), bad.shape)
            yb = np.broadcast_to(np.asarray(y, float), bad.shape)
            i = np.argmax(bad)
            raise DegenerateCoefficientError(
                f"|b| or |c| degenerate at (x, y) = "
                f"({xb.flat[i]}, {yb.flat[i]})")
    xb = np.broadcast_to(np.asarray(x, float), next(iter(vals.values())).shape)
    yb = np.broadcast_to(np.asarray(y, float), xb.shape)
    return InvariantJet(x=xb, y=yb,
                        fubini_pick=8.0 * vals["b"] * vals["c"], **vals)


def compatibility_residual(spec, x, y):
    """The three integrability residuals (r1a, r1b, r2) at a point:

        r1a = Q_x - k_y - k b_y / b
        r1b = P_y - l_x - l c_x / c
        r2  = b Q_y + 2 b_y Q - c P_x - 2 c_x P

    All three vanish identically iff the coefficient functions describe an
    actual surface patch.
    """
    j = invariants_at(spec, x, y)
    return _residual_triple(j)


def _residual_triple(j):
    r1a = j.Q_x - j.k_y - j.k * j.b_y / j.b
    r1b = j.P_y - j.ell_x - j.ell * j.c_x / j.c
    r2 = j.b * j.Q_y + 2.0 * j.b_y * j.Q - (j.c * j.P_x + 2.0 * j.c_x * j.P)
    return r1a, r1b, r2


def grid_axes(spec):
    (x0, x1), (y0, y1) = spec.domain
    nx, ny = spec.grid
    return np.linspace(x0, x1, nx), np.linspace(y0, y1, ny)


@dataclass(frozen=True)
class SurfaceClassification:
    valid_surface: bool
    demoulin: bool
    projective_minimal: bool
    isothermally_asymptotic: bool
    coincidence_flat: bool
    residuals: dict
    tolerance: float

    def flags(self):
        return {
            "valid_surface": self.valid_surface,
            "demoulin": self.demoulin,
            "projective_minimal": self.projective_minimal,
            "isothermally_asymptotic": self.isothermally_asymptotic,
            "coincidence_flat": self.coincidence_flat,
        }


def classify(spec):
    """Scan the full grid and decide the classification flags.

    Each flag compares the sup norm of its defining quantity over the grid
    against spec.tolerance:

      valid_surface            all three compatibility residuals vanish
      demoulin                 P = Q = 0
      projective_minimal       bQ_y + 2b_yQ = 0 and cP_x + 2c_xP = 0
      isothermally_asymptotic  (log b/c)_xy = 0, equivalently k = l
      coincidence_flat         Q_x = P_y = 0, k_y + k b_y/b = 0,
                               l_x + l c_x/c = 0, and both projective
                               minimal equations
    """
    xs, ys = grid_axes(spec)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    j = invariants_grid(spec, X, Y)
    tol = spec.tolerance

    r1a, r1b, r2 = _residual_triple(j)
    compat = max(np.abs(r1a).max(), np.abs(r1b).max(), np.abs(r2).max())

    demoulin_defect = max(np.abs(j.P).max(), np.abs(j.Q).max())
    pm_b = j.b * j.Q_y + 2.0 * j.b_y * j.Q
    pm_c = j.c * j.P_x + 2.0 * j.c_x * j.P
    projmin_defect = max(np.abs(pm_b).max(), np.abs(pm_c).max())
    # (log b/c)_xy = 2 (l - k)
    isothermal_defect = float(np.abs(2.0 * (j.ell - j.k)).max())
    coincidence_defect = max(
        np.abs(j.Q_x).max(), np.abs(j.P_y).max(),
        np.abs(j.k_y + j.k * j.b_y / j.b).max(),
        np.abs(j.ell_x + j.ell * j.c_x / j.c).max(),
        projmin_defect)

    residuals = {
        "compatibility": float(compat),
        "demoulin_defect": float(demoulin_defect),
        "projective_minimal_defect": float(projmin_defect),
        "isothermal_defect": isothermal_defect,
        "coincidence_defect": float(coincidence_defect),
    }
    return SurfaceClassification(
        valid_surface=bool(compat <= tol),
        demoulin=bool(demoulin_defect <= tol),
        projective_minimal=bool(projmin_defect <= tol),
        isothermally_asymptotic=bool(isothermal_defect <= tol),
        coincidence_flat=bool(coincidence_defect <= tol),
        residuals=residuals,
        tolerance=tol)
