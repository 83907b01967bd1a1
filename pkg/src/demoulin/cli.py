"""Command line front end: check, report, export.

Configs are JSON files naming the four coefficient expressions plus scan
parameters:

    {
      "name": "trivial",
      "b": "1", "c": "1", "p": "0", "q": "0",
      "domain": {"x": [0.0, 1.0], "y": [0.0, 1.0]},
      "grid": [33, 33],
      "lambda_samples": [-2, -1, -0.5, 0.5, 1, 2],
      "tolerance": 1e-8
    }

Everything after the four expressions is optional.  Exit codes: 0 when all
verified equivalences hold, 2 on a verification mismatch, 1 on bad usage or
a bad config.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .errors import ChartError, ConfigError, DemoulinError, ParseError
from .expr import parse, to_string
from .frame import determinant_drift, integrate_frame, path_independence_residual
from .gauss import conformality_field
from .loopgroup import (
    flatness_scan, gauge_transform, loop_connection, primitivity_check,
    primitivity_leakage, twisted_symmetry_residual,
)
from .surface import SurfaceSpec, classify, invariants_at, invariants_grid
from ._kernels import USING_NUMBA

__all__ = ["load_config", "run_report", "export_surface", "DiagnosticsReport", "main"]

_SYMMETRY_LAMBDA = 0.7 + 0.3j
_GAUGE_LAMBDAS = (0.5, 2.0, 3.0)


def _parse_expr_field(raw, key):
    if not isinstance(raw, str):
        raise ConfigError(f"config key '{key}' must be an expression string")
    try:
        return parse(raw)
    except ParseError as exc:
        raise ConfigError(f"config key '{key}': {exc}") from exc


def load_config(path, overrides=None):
    """Read a config file into a SurfaceSpec.  `overrides` may carry
    tolerance, lambda_samples, and grid from the command line."""
    overrides = overrides or {}
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    for key in ("b", "c", "p", "q"):
        if key not in raw:
            raise ConfigError(f"config is missing required key '{key}'")

    name = raw.get("name", "unnamed")
    exprs = {key: _parse_expr_field(raw[key], key) for key in ("b", "c", "p", "q")}

    dom = raw.get("domain", {"x": [0.0, 1.0], "y": [0.0, 1.0]})
    try:
        domain = ((float(dom["x"][0]), float(dom["x"][1])),
                  (float(dom["y"][0]), float(dom["y"][1])))
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise ConfigError(f"bad 'domain' entry: {dom!r}") from exc

    grid = overrides.get("grid", raw.get("grid", [33, 33]))
    lams = overrides.get("lambda_samples",
                         raw.get("lambda_samples", [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]))
    tol = overrides.get("tolerance", raw.get("tolerance", 1e-8))
    try:
        spec = SurfaceSpec(
            name=str(name), domain=domain,
            grid=(int(grid[0]), int(grid[1])),
            lambda_samples=tuple(float(v) for v in lams),
            tolerance=float(tol), **exprs)
    except (ValueError, TypeError, IndexError) as exc:
        raise ConfigError(f"bad config: {exc}") from exc
    return spec


@dataclass
class DiagnosticsReport:
    """Everything the verification run measured, JSON-serializable."""

    schema_version: int
    tool: dict
    config: dict
    classification: dict
    frame: dict
    flatness: dict
    gauss: dict
    symmetry: dict
    primitivity: dict
    gauge: dict
    equivalences: list
    verified: bool
    timing: dict

    def to_dict(self):
        return asdict(self)


def _spec_echo(spec):
    return {
        "name": spec.name,
        "b": to_string(spec.b), "c": to_string(spec.c),
        "p": to_string(spec.p), "q": to_string(spec.q),
        "domain": {"x": list(spec.domain[0]), "y": list(spec.domain[1])},
        "grid": list(spec.grid),
        "lambda_samples": list(spec.lambda_samples),
        "tolerance": spec.tolerance,
    }


def _center(spec):
    (x0, x1), (y0, y1) = spec.domain
    return 0.5 * (x0 + x1), 0.5 * (y0 + y1)


def run_report(spec):
    """Full verification run.  Returns a DiagnosticsReport; report.verified
    is True iff every theorem equivalence held on this subject."""
    t_start = time.perf_counter()
    tol = spec.tolerance
    cls = classify(spec)

    # frame transport quality
    field = integrate_frame(spec)
    (x0, x1), (y0, y1) = spec.domain
    loop_res = path_independence_residual(spec, (x0, y0, x1, y1))
    frame_info = {
        "determinant_drift": determinant_drift(field.values),
        "path_independence_residual": loop_res,
        "mc_residual_sup": None,  # filled from the lam = 1 scan below
    }

    # spectral flatness scans
    flat = {}
    for twist in ("tau1", "tau2"):
        lams = set(spec.lambda_samples) | {1.0}
        scan = flatness_scan(spec, twist, sorted(lams))
        flat[twist] = {repr(l): r for l, r in sorted(scan.items())}
        if twist == "tau1":
            frame_info["mc_residual_sup"] = scan[1.0]
    tau1_flat = all(r <= tol for r in flat["tau1"].values())
    tau2_flat = all(r <= tol for r in flat["tau2"].values())

    # conformality over the full grid, using the integrated frames
    X, Y = np.meshgrid(field.xs, field.ys, indexing="ij")
    jets = invariants_grid(spec, X, Y)
    cx, cy = _center(spec)
    gauss_info = {}
    for kind in ("first_order", "conformal"):
        Exx, Eyy, Exy, closed, dev = conformality_field(field.values, jets, kind)
        ic, jc = len(field.xs) // 2, len(field.ys) // 2
        gauss_info[kind] = {
            "triple_center": [float(Exx[ic, jc]), float(Eyy[ic, jc]), float(Exy[ic, jc])],
            "closed_form_center": [float(np.asarray(closed[0])[ic, jc]),
                                   float(np.asarray(closed[1])[ic, jc]),
                                   float(np.asarray(closed[2])[ic, jc])],
            "closed_form_deviation": dev,
            "conformal": bool(max(np.abs(Exx).max(), np.abs(Eyy).max()) <= tol),
        }

    # Demoulin-only diagnostics at the center jet
    center_jet = invariants_at(spec, cx, cy)
    symmetry = {"applicable": cls.demoulin, "lambda": repr(_SYMMETRY_LAMBDA),
                "residual": None}
    prim = {"applicable": cls.demoulin, "holds": None, "leakage": None}
    if cls.demoulin:
        symmetry["residual"] = twisted_symmetry_residual(center_jet, _SYMMETRY_LAMBDA)
        prim["leakage"] = primitivity_leakage(center_jet)
        prim["holds"] = primitivity_check(center_jet)

    # gauge readbacks at the center jet
    gauge_rows = []
    bc_center = center_jet.b * center_jet.c
    for lam in _GAUGE_LAMBDAS:
        pair = loop_connection(center_jet, lam, "tau1")
        rb = gauge_transform(pair)
        gauge_rows.append({
            "lambda": lam, "b": rb.b, "c": rb.c, "k": rb.k, "ell": rb.ell,
            "P": rb.P, "Q": rb.Q,
            "metric_deviation": abs(rb.b * rb.c - bc_center),
        })

    equivalences = [
        {
            "name": "first_order_conformal_iff_demoulin",
            "lhs": gauss_info["first_order"]["conformal"],
            "rhs": cls.demoulin,
        },
        {
            "name": "tau1_flat_iff_demoulin_or_coincidence",
            "lhs": tau1_flat,
            "rhs": cls.demoulin or cls.coincidence_flat,
        },
        {
            "name": "tau2_flat_iff_projective_minimal",
            "lhs": tau2_flat,
            "rhs": cls.projective_minimal,
        },
        {
            "name": "demoulin_implies_projective_minimal",
            "lhs": (not cls.demoulin),
            "rhs": cls.projective_minimal,
            "implication": True,
        },
    ]
    for eq in equivalences:
        if eq.get("implication"):
            eq["holds"] = bool(eq["lhs"] or eq["rhs"])
        else:
            eq["holds"] = bool(eq["lhs"]) == bool(eq["rhs"])
    verified = all(eq["holds"] for eq in equivalences)

    return DiagnosticsReport(
        schema_version=1,
        tool={"name": "demoulin", "version": __version__, "numba": USING_NUMBA},
        config=_spec_echo(spec),
        classification={"flags": cls.flags(), "residuals": cls.residuals},
        frame=frame_info,
        flatness=flat,
        gauss=gauss_info,
        symmetry=symmetry,
        primitivity=prim,
        gauge={"readback": gauge_rows},
        equivalences=equivalences,
        verified=verified,
        timing={"seconds": time.perf_counter() - t_start},
    )


def export_surface(spec, out_path, F0=None):
    """Integrate the frame field and write the affine-chart surface samples
    S = (f1/f0, f2/f0, f3/f0) as CSV rows x, y, S1, S2, S3.

    Raises ChartError when f0 vanishes at a grid node (the patch leaves the
    affine chart).
    """
    field = integrate_frame(spec, F0=F0)
    f = field.values[..., :, 0]  # first column of every frame
    f0 = f[..., 0]
    bad = np.abs(f0) <= spec.tolerance
    if np.any(bad):
        i, j = np.unravel_index(np.argmax(bad), bad.shape)
        raise ChartError(
            f"f0 vanishes at grid node (x, y) = ({field.xs[i]}, {field.ys[j]})")
    S = f[..., 1:] / f0[..., None]
    count = 0
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "S1", "S2", "S3"])
        for i, xv in enumerate(field.xs):
            for j, yv in enumerate(field.ys):
                writer.writerow([repr(float(xv)), repr(float(yv)),
                                 repr(float(S[i, j, 0])), repr(float(S[i, j, 1])),
                                 repr(float(S[i, j, 2]))])
                count += 1
    return count


def _report_json(report):
    return json.dumps(report.to_dict(), indent=2, sort_keys=True)


def _print_flags(cls_dict):
    for name, value in cls_dict["flags"].items():
        print(f"{name}: {str(value).lower()}")


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="demoulin",
        description="Verify surface classifications against their "
                    "flat-family and conformality characterizations.")
    ap.add_argument("--version", action="version", version=f"demoulin {__version__}")
    ap.add_argument("--tol", type=float, default=None,
                    help="override the config tolerance")
    ap.add_argument("--lambda", dest="lambdas", type=str, default=None,
                    help="comma separated spectral values, e.g. '-2,-1,0.5,2'")
    ap.add_argument("--grid", type=str, default=None,
                    help="grid override as NXxNY, e.g. '65x65'")
    sub = ap.add_subparsers(dest="command", required=True)
    p_check = sub.add_parser("check", help="print classification flags")
    p_check.add_argument("config")
    p_report = sub.add_parser("report", help="write the full JSON report")
    p_report.add_argument("config")
    p_report.add_argument("--out", required=True)
    p_export = sub.add_parser("export", help="write surface samples as CSV")
    p_export.add_argument("config")
    p_export.add_argument("--out", required=True)
    return ap


def _overrides_from_args(args):
    ov = {}
    if args.tol is not None:
        ov["tolerance"] = args.tol
    if args.lambdas is not None:
        try:
            ov["lambda_samples"] = [float(v) for v in args.lambdas.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad --lambda list: {args.lambdas!r}") from exc
    if args.grid is not None:
        try:
            nx, ny = args.grid.lower().split("x")
            ov["grid"] = (int(nx), int(ny))
        except ValueError as exc:
            raise ConfigError(f"bad --grid value: {args.grid!r}") from exc
    return ov


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        spec = load_config(args.config, _overrides_from_args(args))
        if args.command == "check":
            report = run_report(spec)
            _print_flags(report.classification)
            print(f"verified: {str(report.verified).lower()}")
            return 0 if report.verified else 2
        if args.command == "report":
            report = run_report(spec)
            with open(args.out, "w") as fh:
                fh.write(_report_json(report) + "\n")
            for eq in report.equivalences:
                status = "ok" if eq["holds"] else "MISMATCH"
                print(f"{eq['name']}: {status} (lhs={eq['lhs']}, rhs={eq['rhs']})")
            print(f"report written to {args.out}")
            return 0 if report.verified else 2
        count = export_surface(spec, args.out)
        print(f"wrote {count} samples to {args.out}")
        return 0
    except ChartError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DemoulinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
