"""Run a scenario and write deterministic JSON/CSV reports."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .backgrounds import jet_eval
from .errors import (
    ChartDomainError,
    DegenerateModel,
    DomainError,
    FullyDegenerate,
    NoRealRoot,
)
from .geometry import (
    MINKOWSKI,
    PullbackForm,
    cayley_hamilton_residual,
    jet_strain,
    pullback_two_form,
)
from .models import eval_model
from .rays import BranchField, integrate_ray, null_project
from .sampling import draw_batch
from .scenario import Scenario
from .symbol import (
    char_poly,
    classify_form,
    contract_symbol,
    degeneracy_report,
    determinant_identity,
    eval_quartic,
    principal_part,
    quadratic_forms,
    quadratic_value,
    quartic_form,
    symbol,
)

TOOL_NAME = "pullback_hyperbolicity"
POINTS_COLUMNS = [
    "index", "x0", "x1", "x2", "x3", "sigma2", "xi", "detG1", "detG2",
    "n+G1", "n0G1", "n-G1", "n+G2", "n0G2", "n-G2", "hyperbolic",
]  # fmt: skip
RAY_COLUMNS = ["lambda", "x0", "x1", "x2", "x3", "k0", "k1", "k2", "k3", "P"]
VERIFY_CHUNK = 1000

NOT_HYPERBOLIC = "NOT_HYPERBOLIC"
HYPERBOLIC = "HYPERBOLIC"
UNDETERMINED = "UNDETERMINED"


# -- serialization ---------------------------------------------------------


def fmt_float(x) -> str:
    return format(float(x), ".17g")


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON with every float written to 17 significant digits; non-finite floats become null."""
    return _encode(obj, indent, 0) + "\n"


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt_float(v) if math.isfinite(v) else ""
    return str(v)


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


# -- point analyses --------------------------------------------------------


def analyze_point(bg, geom, model, x, index: int = 0, g=MINKOWSKI, rank_tol: float = 1e-9) -> dict:
    """Verdict record at one base point; domain problems are recorded, not raised."""
    rec = {
        "index": index,
        "x": [float(v) for v in x],
        "phi": None,
        "sigma2": None,
        "xi": None,
        "det_G1": None,
        "det_G2": None,
        "det_G2_predicted": None,
        "inertia_G1": None,
        "inertia_G2": None,
        "kernel_G1": None,
        "hyperbolic": None,
        "notes": [],
        "error": None,
    }
    try:
        jet, h = jet_eval(bg, geom, np.asarray(x, dtype=float))
    except ChartDomainError as exc:
        rec["error"] = f"ChartDomainError: {exc}"
        return rec
    rec["phi"] = jet.phi.tolist()
    sigma2 = float(jet_strain(jet, h, g).sigma2)
    rec["sigma2"] = sigma2
    try:
        xi = eval_model(model, sigma2).xi
    except (DomainError, DegenerateModel) as exc:
        # G1 does not involve the Lagrangian and is still classified
        f1 = classify_form(quadratic_forms(jet, g, h, 0.0)[0], rank_tol)
        rec.update(
            det_G1=f1.det,
            inertia_G1=list(f1.inertia),
            kernel_G1=f1.kernel.T.tolist(),
            hyperbolic=False,
            error=f"{type(exc).__name__}: {exc}",
        )
        return rec
    v = degeneracy_report(jet, g, h, xi, rank_tol)
    rec.update(
        xi=v.xi,
        det_G1=v.det_G1,
        det_G2=v.det_G2,
        det_G2_predicted=v.det_G2_predicted,
        inertia_G1=list(v.inertia_G1),
        inertia_G2=list(v.inertia_G2),
        kernel_G1=v.kernel_G1.T.tolist(),
        hyperbolic=v.hyperbolic,
        notes=list(v.notes),
    )
    return rec


def _parallel_map(fn, items, threads: int) -> list:
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # map() yields in submission order, never completion order
        return list(pool.map(fn, items))


def scenario_points(sc: Scenario) -> np.ndarray:
    mp = sc.mode_params
    if sc.mode == "point":
        return np.array([mp["x"]])
    if sc.mode == "grid":
        axes = [np.linspace(lo, hi, n) for lo, hi, n in zip(mp["lo"], mp["hi"], mp["counts"])]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)
    if sc.mode == "random":
        from .sampling import sample_rng

        lo, hi = np.array(mp["lo"]), np.array(mp["hi"])
        return np.array([sample_rng(sc.seed, i).uniform(lo, hi) for i in range(mp["samples"])])
    raise ValueError(f"mode {sc.mode!r} has no point set")


def aggregate(records: list[dict]) -> dict:
    evaluated = [r for r in records if r["inertia_G1"] is not None]
    singular = [r for r in evaluated if r["inertia_G1"][1] > 0]
    det_g2 = [r["det_G2"] for r in records if r["det_G2"] is not None]
    if not evaluated:
        verdict = UNDETERMINED
    elif singular or not all(r["hyperbolic"] for r in evaluated):
        verdict = NOT_HYPERBOLIC
    else:
        verdict = HYPERBOLIC
    return {
        "n_points": len(records),
        "n_evaluated": len(evaluated),
        "n_errors": sum(1 for r in records if r["error"] is not None),
        "fraction_singular_G1": len(singular) / len(evaluated) if evaluated else None,
        "min_det_G2": min(det_g2) if det_g2 else None,
        "max_det_G2": max(det_g2) if det_g2 else None,
        "verdict": verdict,
    }


# -- identity sweep --------------------------------------------------------


def _rel_max(a, b, axes=None):
    return np.abs(a - b).max(axis=axes) / (1 + np.abs(b).max(axis=axes))


def identity_residuals(batch, g=MINKOWSKI) -> dict:
    """Per-sample normalized residuals of every algebraic identity."""
    jets, h, xi, k = batch.jets, batch.target, batch.xi, batch.k
    strain = jet_strain(jets, h, g)
    s = strain.sigma
    sigma2 = s[..., 1]
    H = pullback_two_form(jets, h, g)
    P = char_poly(jets, g, h, xi, k)
    G1, G2 = quadratic_forms(jets, g, h, xi)
    P1, P2 = quadratic_value(G1, k), quadratic_value(G2, k)
    Ms = symbol(jets, g, h, xi, k)
    Mc = contract_symbol(principal_part(jets, g, h, xi), k)
    Lnorm = np.abs(strain.L_mixed).max(axis=(-2, -1))

    Hg = PullbackForm.from_lower(batch.H_generic, g)
    _, U, res_u = determinant_identity(Hg, batch.f)
    sigma2_g = Hg.HH / 2
    G1_generic = sigma2_g[:, None, None] * g.g_inv + Hg.H_mixed @ Hg.H_upper

    def scaled_det(G):
        n = np.abs(G).max(axis=(-2, -1))
        return np.abs(np.linalg.det(G)) / np.where(n > 0, n, 1.0) ** 4

    one_plus = 1 + xi * sigma2
    det_G2 = np.linalg.det(G2)
    pred_sq = one_plus**2 / g.det
    pred_lin = one_plus / g.det
    det_minus = np.linalg.det(np.eye(4) - xi[:, None, None] * H.Hsq_mixed)
    G4 = quartic_form(G1, G2, h.det_h)

    return {
        "factorization": np.abs(P - h.det_h * P1 * P2) / (1 + np.abs(P)),
        "dual_path_symbol": _rel_max(Mc, Ms, axes=(-2, -1)),
        "quartic_form": np.abs(eval_quartic(G4, k) - P) / (1 + np.abs(P)),
        "HH_equals_2sigma2": np.abs(H.HH - 2 * sigma2) / (1 + 2 * np.abs(sigma2)),
        "HdH_vanishes": np.abs(H.HdH) / (1 + np.sum(H.H_lower**2, axis=(-2, -1))),
        "cayley_hamilton": cayley_hamilton_residual(strain),
        "sigma3_sigma4_vanish": np.maximum(
            np.abs(s[..., 2]) / (1 + Lnorm) ** 3, np.abs(s[..., 3]) / (1 + Lnorm) ** 4
        ),
        "U_squared_generic": res_u / (1 + U**2),
        "det_G1_vanishes": scaled_det(G1),
        "det_delta_minus_xi_H2": np.abs(det_minus - one_plus**2) / (1 + one_plus**2),
        "det_G2_squared": np.abs(det_G2 - pred_sq) / (1 + np.abs(pred_sq)),
        "det_G2_unsquared": np.abs(det_G2 - pred_lin) / (1 + np.abs(pred_lin)),
        "det_G1_generic_control": scaled_det(G1_generic),
    }


# identity name -> tolerance key in the scenario
ENFORCED = {
    "factorization": "factorization",
    "dual_path_symbol": "scalar",
    "quartic_form": "factorization",
    "HH_equals_2sigma2": "scalar",
    "HdH_vanishes": "scalar",
    "cayley_hamilton": "scalar",
    "sigma3_sigma4_vanish": "scalar",
    "U_squared_generic": "identity",
    "det_G1_vanishes": "identity",
    "det_delta_minus_xi_H2": "identity",
    "det_G2_squared": "identity",
}
NEGATIVE_CONTROL_MIN_FRACTION = 0.99


def run_verify(sc: Scenario) -> dict:
    n = sc.mode_params["samples"]
    starts = list(range(0, n, VERIFY_CHUNK))

    def chunk(start):
        return identity_residuals(draw_batch(sc.seed, min(VERIFY_CHUNK, n - start), start))

    parts = _parallel_map(chunk, starts, sc.threads)
    res = {key: np.concatenate([p[key] for p in parts]) for key in parts[0]}
    identities = {}
    ok = True
    for name, tol_key in ENFORCED.items():
        tol = sc.tolerances[tol_key]
        worst = float(res[name].max())
        passed = worst <= tol
        ok &= passed
        identities[name] = {"max_residual": worst, "tolerance": tol, "pass": passed}
    control = res["det_G1_generic_control"] > sc.tolerances["identity"]
    frac = float(control.mean())
    control_ok = frac >= NEGATIVE_CONTROL_MIN_FRACTION
    ok &= control_ok
    sq, lin = float(res["det_G2_squared"].max()), float(res["det_G2_unsquared"].max())
    tol = sc.tolerances["identity"]
    confirmed = 2 if sq <= tol < lin else (1 if lin <= tol < sq else None)
    return {
        "samples": n,
        "identities": identities,
        "negative_control": {
            "description": "det G1 built from generic antisymmetric H (not a pullback) exceeds the degeneracy tolerance",
            "fraction_nonsingular": frac,
            "required_fraction": NEGATIVE_CONTROL_MIN_FRACTION,
            "pass": control_ok,
        },
        "det_G2_exponent": {
            "candidate_exponents": [1, 2],
            "max_residual_exponent_1": lin,
            "max_residual_exponent_2": sq,
            "confirmed_exponent": confirmed,
            "note": "det G2 = (1 + xi sigma2)^e / det g; the determinant identity with f = -xi predicts e = 2",
        },
        "pass": bool(ok),
    }


# -- rays ------------------------------------------------------------------


def run_ray(sc: Scenario):
    mp = sc.mode_params
    field = BranchField(
        sc.build_background(), sc.build_geometry(), sc.model, mp["branch"], gradient=mp["gradient"]
    )
    summary = {"branch": mp["branch"], "gradient": mp["gradient"], "x0": mp["x0"], "null_root_note": None}
    if "k" in mp:
        k0 = np.array(mp["k"])
    else:
        try:
            root = null_project(field, mp["x0"], mp["k_spatial"], root=mp["root"])
        except (NoRealRoot, FullyDegenerate, ChartDomainError, DomainError, DegenerateModel) as exc:
            summary.update(error=f"{type(exc).__name__}: {exc}", termination=None, n_states=0)
            return summary, None
        k0, summary["null_root_note"] = root.k, root.note or None
    try:
        trace = integrate_ray(
            field,
            mp["x0"],
            k0,
            span=mp["span"],
            step=mp["step"],
            adaptive=mp["adaptive"],
            drift_tol=mp["drift_tol"],
        )
    except DegenerateModel as exc:
        summary.update(k0=k0.tolist(), error=f"DegenerateModel: {exc}", termination=None, n_states=0)
        return summary, None
    summary.update(
        k0=k0.tolist(),
        error=None,
        termination=trace.termination,
        n_states=len(trace.states),
        P0=trace.states[0].P if trace.states else None,
        drift=trace.drift,
        final_lambda=trace.states[-1].lam if trace.states else None,
        final_x=trace.states[-1].x.tolist() if trace.states else None,
        final_k=trace.states[-1].k.tolist() if trace.states else None,
        notes=list(trace.notes),
    )
    return summary, trace


# -- driver ----------------------------------------------------------------


def build_report(sc: Scenario):
    """Run the scenario; return ``(report, files)`` with ``files`` mapping name -> text."""
    report = {
        "tool": {"name": TOOL_NAME, "version": __version__},
        "scenario": sc.to_dict(),
        "mode": sc.mode,
    }
    files: dict[str, str] = {}
    if sc.mode in ("point", "grid", "random"):
        bg, geom = sc.build_background(), sc.build_geometry()
        pts = scenario_points(sc)
        rank_tol = sc.tolerances["rank"]
        records = _parallel_map(
            lambda item: analyze_point(bg, geom, sc.model, item[1], item[0], rank_tol=rank_tol),
            list(enumerate(pts)),
            sc.threads,
        )
        report["aggregate"] = aggregate(records)
        report["points"] = records
        rows = []
        for r in records:
            i1 = r["inertia_G1"] or [None] * 3
            i2 = r["inertia_G2"] or [None] * 3
            rows.append([r["index"], *r["x"], r["sigma2"], r["xi"], r["det_G1"], r["det_G2"], *i1, *i2, r["hyperbolic"]])
        files["points.csv"] = to_csv(POINTS_COLUMNS, rows)
    elif sc.mode == "verify":
        report["verify"] = run_verify(sc)
        report["aggregate"] = {"verdict": NOT_HYPERBOLIC if report["verify"]["identities"]["det_G1_vanishes"]["pass"] else UNDETERMINED}
    elif sc.mode == "ray":
        summary, trace = run_ray(sc)
        report["ray"] = summary
        if trace is not None:
            rows = [[s.lam, *s.x, *s.k, s.P] for s in trace.states]
            files["ray.csv"] = to_csv(RAY_COLUMNS, rows)
    files = {"report.json": dumps(report), **files}
    if sc.output_format == "json":
        files = {"report.json": files["report.json"]}
    elif sc.output_format == "csv":
        files.pop("report.json")
    return report, files


def write_files(files: dict, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in files.items():
        p = out / name
        p.write_text(text, encoding="utf-8")
        written.append(p)
    return written


def exit_code(report: dict) -> int:
    if report["mode"] == "verify" and not report["verify"]["pass"]:
        return 1
    return 0
