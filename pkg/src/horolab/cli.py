"""Command-line front end.

Subcommands: farey, decompose, cholesky, membership, volumes, duplicates,
sthe-run, marklof-check, disjointness-sample.  Config files are YAML with
rational literals written as strings like "3/2"; those are parsed exactly.
Numeric output carries 15 significant digits.  The global comparison
tolerance can be overridden with the HOROLAB_TOL environment variable.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from . import coords, experiments, farey, targets
from .errors import ConfigError, HorolabError


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------


def _scalar(value):
    """Numbers pass through; strings like '3/2' become exact Fractions."""
    if isinstance(value, str):
        try:
            return Fraction(value)
        except ValueError as exc:
            raise ConfigError(f"cannot parse numeric literal {value!r}") from exc
    return value


def parse_vector(text: str) -> list:
    return [_scalar(v.strip()) for v in text.split(",") if v.strip()]


def parse_matrix(text: str) -> np.ndarray:
    if text.startswith("@"):
        doc = yaml.safe_load(Path(text[1:]).read_text())
        rows = [[_scalar(v) for v in row] for row in doc]
    else:
        rows = [parse_vector(row) for row in text.split(";")]
    return np.array([[float(v) for v in row] for row in rows], dtype=float)


def _round15(x):
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(f"{float(x):.15g}")
    if isinstance(x, np.ndarray):
        return _round15(x.tolist())
    if isinstance(x, (list, tuple)):
        return [_round15(v) for v in x]
    if isinstance(x, dict):
        return {k: _round15(v) for k, v in x.items()}
    return x


def _emit(obj, fh=None) -> None:
    json.dump(_round15(obj), fh or sys.stdout, indent=2, sort_keys=True)
    (fh or sys.stdout).write("\n")


def _matrix_json(m: np.ndarray):
    return [[float(v) for v in row] for row in np.asarray(m, dtype=float)]


# ---------------------------------------------------------------------------
# target / config construction
# ---------------------------------------------------------------------------


def target_from_dict(d: int, doc: dict):
    kind = doc.get("kind")
    if kind == "stable":
        ytilde = tuple(float(_scalar(v)) for v in doc.get("ytilde", [0.0] * (d - 1)))
        return targets.StableSection(d=d, T=float(_scalar(doc.get("T", 1))), eps=float(_scalar(doc["eps"])), ytilde=ytilde)
    if kind == "spherical":
        chart = coords.Chart(dim=d, radius=float(_scalar(doc["radius"])))
        return targets.SphericalSection(d=d, T=float(_scalar(doc.get("T", 2))), chart=chart)
    if kind == "grenier-stable":
        return targets.GrenierBoxStable(
            d=d,
            alphas=tuple(float(_scalar(v)) for v in doc["alphas"]),
            gammas=tuple(float(_scalar(v)) for v in doc["gammas"]),
            beta_lo=tuple(float(_scalar(v)) for v in doc["beta_lo"]) if "beta_lo" in doc else None,
            beta_hi=tuple(float(_scalar(v)) for v in doc["beta_hi"]) if "beta_hi" in doc else None,
            ktilde=tuple(float(_scalar(v)) for v in doc["ktilde"]) if doc.get("ktilde") else None,
            T=float(_scalar(doc.get("T", 1))),
            eps=float(_scalar(doc["eps"])),
            ytilde=tuple(float(_scalar(v)) for v in doc.get("ytilde", [0.0] * (d - 1))),
        )
    if kind == "grenier-spherical":
        return targets.GrenierBoxSpherical(
            d=d,
            alphas=tuple(float(_scalar(v)) for v in doc["alphas"]),
            gammas=tuple(float(_scalar(v)) for v in doc["gammas"]),
            chart=coords.Chart(dim=d, radius=float(_scalar(doc["radius"]))),
            ktilde=tuple(float(_scalar(v)) for v in doc["ktilde"]) if doc.get("ktilde") else None,
            T=float(_scalar(doc["T"])) if "T" in doc else None,
        )
    raise ConfigError(f"unknown target kind {kind!r}")


def _l_from_config(doc, d: int):
    if doc is None or doc == "identity":
        return None
    if isinstance(doc, dict) and "diag_a2" in doc:
        a2 = float(_scalar(doc["diag_a2"]))
        a = math.sqrt(a2)
        if d != 2:
            raise ConfigError("diag_a2 shorthand is for d = 2")
        return ((a, 0.0), (0.0, 1.0 / a))
    rows = [[float(_scalar(v)) for v in row] for row in doc]
    return tuple(tuple(row) for row in rows)


def config_from_dict(doc: dict) -> experiments.ExperimentConfig:
    d = int(doc["d"])
    a_doc = doc.get("A", {"lo": [0.0] * (d - 1), "hi": [1.0] * (d - 1)})
    rule_doc = doc.get("T_rule", {"kind": "constant"})
    if rule_doc["kind"] == "constant":
        rule = ("constant",)
    elif rule_doc["kind"] == "growing":
        rule = ("growing", float(_scalar(rule_doc["eta_prime"])))
    else:
        raise ConfigError(f"unknown T rule {rule_doc['kind']!r}")
    est_doc = doc.get("estimator", {"kind": "auto"})
    if isinstance(est_doc, str):
        est_doc = {"kind": est_doc}
    kind = est_doc["kind"]
    if kind in ("auto", "exact-window", "window-sum"):
        est = (kind,)
    elif kind in ("grid", "monte-carlo"):
        est = (kind, int(est_doc["n"]))
    else:
        raise ConfigError(f"unknown estimator {kind!r}")
    return experiments.ExperimentConfig(
        d=d,
        target=target_from_dict(d, doc["target"]),
        A_lo=tuple(float(_scalar(v)) for v in a_doc["lo"]),
        A_hi=tuple(float(_scalar(v)) for v in a_doc["hi"]),
        t_schedule=tuple(float(_scalar(v)) for v in doc["t_schedule"]),
        L=_l_from_config(doc.get("L"), d),
        T_rule=rule,
        estimator=est,
        seed=int(doc.get("seed", 0)),
        tolerance=float(_scalar(doc["tolerance"])) if "tolerance" in doc else None,
    )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_farey(args) -> int:
    L = parse_matrix(args.L) if args.L else None
    if args.box:
        vals = parse_vector(args.box)
        half = len(vals) // 2
        box = ([float(v) for v in vals[:half]], [float(v) for v in vals[half:]])
    else:
        box = None
    if L is None:
        pts = farey.enumerate_farey(args.d, args.Q) if box is None else farey.enumerate_translated_farey(
            np.eye(args.d), args.Q, box
        )
    else:
        d = L.shape[0]
        if box is None:
            box = ([0.0] * (d - 1), [1.0] * (d - 1))
        pts = farey.enumerate_translated_farey(L, args.Q, box)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        farey.points_to_csv(pts, out)
    finally:
        if args.out:
            out.close()
    return 0


def _cmd_decompose(args) -> int:
    m = parse_matrix(args.matrix)
    nak = coords.iwasawa(m)
    doc = {"n": _matrix_json(nak.n), "a": _matrix_json(nak.a), "k": _matrix_json(nak.k)}
    try:
        rec = coords.hrd_coords(m)
        d = m.shape[0]
        s = -math.log(float(rec.y[d - 1])) / (d - 1)
        sec = coords.section_coords(rec.m_h, s)
        doc.update(
            {
                "y": [float(v) for v in rec.y],
                "prefix": rec.prefix,
                "x": _matrix_json(sec.x),
                "ys": [float(v) for v in sec.ys],
                "height": sec.height,
                "kprime": _matrix_json(sec.kprime),
            }
        )
    except HorolabError as exc:
        doc.update({"y": None, "prefix": None, "x": None, "ys": None, "height": None, "kprime": None,
                    "boundary": str(exc)})
    _emit(doc)
    return 0


def _cmd_cholesky(args) -> int:
    u = np.array([float(v) for v in parse_vector(args.u)], dtype=float)
    b = coords.reverse_cholesky_recursive(u) if args.recursive else coords.reverse_cholesky(u)
    target = np.eye(u.size) + np.outer(u, u)
    residual = float(np.abs(b @ b.T - target).max())
    _emit({"B": _matrix_json(b), "residual": residual, "det_squared": float(np.linalg.det(b)) ** 2,
           "one_plus_norm_sq": 1.0 + float(u @ u)})
    return 0


def _cmd_membership(args) -> int:
    doc = yaml.safe_load(Path(args.target).read_text())
    target = target_from_dict(args.d, doc)
    L = parse_matrix(args.L) if args.L else None
    x = [float(v) for v in parse_vector(args.x)]
    fn = targets.member_direct if args.direct else targets.member_dual
    witness = fn(target, L, x, args.t)
    if witness is None:
        print("none")
        return 0
    _emit(
        {
            "source": list(witness.farey.source),
            "alpha_prime": list(witness.farey.alpha_prime),
            "alpha_d": witness.farey.alpha_d,
            "point": list(witness.farey.point),
            "s": witness.s,
            "xt": list(witness.xt),
            "extra": {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in witness.extra.items()
                      if k in ("z", "c")},
        }
    )
    return 0


def _cmd_volumes(args) -> int:
    doc = {"kind": args.target, "T": args.T, "eps": args.eps, "radius": args.radius}
    if args.target == "stable":
        tgt = targets.StableSection(d=args.d, T=args.T, eps=args.eps)
    elif args.target == "spherical":
        tgt = targets.SphericalSection(d=args.d, T=args.T, chart=coords.Chart(dim=args.d, radius=args.radius))
    else:
        raise ConfigError("volumes supports --target stable|spherical; use a config file for coordinate boxes")
    rec = targets.measure_formula(tgt)
    _emit({"target": doc["kind"], "value": rec.value, "T": rec.T, "ratio_exponent": rec.ratio_exponent,
           "method": rec.method})
    return 0


def _cmd_duplicates(args) -> int:
    L = parse_matrix(args.L)
    region = farey.duplicate_region(L, assume_generic=args.assume_generic)
    _emit(
        {
            "kind": region.kind,
            "period_basis": None if region.period_basis is None else _matrix_json(region.period_basis),
        }
    )
    return 0


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _cmd_sthe_run(args) -> int:
    doc = yaml.safe_load(Path(args.config).read_text())
    config = config_from_dict(doc)
    results = experiments.sthe_run(config, jobs=args.jobs)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / "results.csv"
    with open(csv_path, "w") as fh:
        experiments.write_results_csv(results, fh)
    if len(results) >= 2:
        report = experiments.convergence_report(results, tolerance=config.tolerance)
        slope, final, passed, degenerate = report.slope, report.final_rel_error, report.passed, report.degenerate
    else:
        final = results[0].rel_error
        slope = None
        passed = None if (config.tolerance is None or final is None) else bool(final <= config.tolerance)
        degenerate = results[0].degenerate
    summary = {
        "rows": len(results),
        "final_rel_error": final,
        "slope": slope,
        "tolerance": config.tolerance,
        "passed": passed,
        "degenerate": degenerate,
        "region_warning": config.region_warning or None,
    }
    summary_path = outdir / "summary.json"
    with open(summary_path, "w") as fh:
        _emit(summary, fh)
    manifest = {
        "version": "1",
        "command": "sthe-run",
        "config": doc,
        "seed": config.seed,
        "outputs": [csv_path.name, summary_path.name],
        "checksums": {csv_path.name: _sha256(csv_path), summary_path.name: _sha256(summary_path)},
    }
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _emit(summary)
    if args.check and passed is False:
        return 1
    return 0


def _cmd_marklof_check(args) -> int:
    s1 = math.log(args.Tprime) / args.d
    res = experiments.marklof_average(args.d, args.Q, s1=s1)
    rel = abs(res.empirical - res.predicted) / res.predicted
    _emit(
        {
            "empirical": res.empirical,
            "predicted": res.predicted,
            "rel_error": rel,
            "n_total": res.n_total,
            "n_slab": res.n_slab,
        }
    )
    return 1 if args.tol is not None and rel > args.tol else 0


def _cmd_disjointness_sample(args) -> int:
    report = targets.disjointness_property_sample(args.d, args.n, seed=args.seed)
    _emit(
        {
            "d": report.d,
            "n_samples": report.n_samples,
            "observed_min": report.observed_min,
            "bound": report.bound,
            "ok": report.ok,
        }
    )
    return 0 if report.ok else 1


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="horolab",
        description="Farey lattice enumeration, SL(d) decompositions, shrinking-target "
        "membership tests and equidistribution experiments.",
        epilog="Set HOROLAB_TOL to override the global comparison tolerance and "
        "HOROLAB_BACKEND=numpy to disable the numba kernels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("farey", help="enumerate (translated) Farey points as CSV: q,p_i,x_i columns")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--Q", type=float, required=True, help="denominator bound")
    p.add_argument("--L", help="translation matrix, 'a,b;c,d' with rationals like 1/2, or @file")
    p.add_argument("--box", help="lo...,hi... bounds for the projected points")
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(fn=_cmd_farey)

    p = sub.add_parser("decompose", help="NAK factors plus section coordinates as JSON")
    p.add_argument("--matrix", required=True, help="'a,b;c,d' or @file")
    p.set_defaults(fn=_cmd_decompose)

    p = sub.add_parser("cholesky", help="rank-one reverse Cholesky factor")
    p.add_argument("--u", required=True, help="comma-separated vector")
    p.add_argument("--recursive", action="store_true", help="use the peeling recursion instead of the closed form")
    p.set_defaults(fn=_cmd_cholesky)

    p = sub.add_parser("membership", help="shrinking-target membership witness or 'none'")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--target", required=True, help="YAML target spec file")
    p.add_argument("--x", required=True, help="parameter point, comma-separated")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--L", help="translation matrix")
    p.add_argument("--direct", action="store_true", help="use the direct slab test (stable boxes)")
    p.set_defaults(fn=_cmd_membership)

    p = sub.add_parser("volumes", help="closed-form target measures")
    p.add_argument("--target", required=True, choices=["stable", "spherical"])
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--radius", type=float, default=0.5)
    p.set_defaults(fn=_cmd_volumes)

    p = sub.add_parser("duplicates", help="duplicate-free parameter region for a translation")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--L", required=True)
    p.add_argument("--assume-generic", action="store_true")
    p.set_defaults(fn=_cmd_duplicates)

    p = sub.add_parser("sthe-run", help="run an equidistribution sweep from a YAML config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="sthe-out")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--check", action="store_true", help="exit 1 when the tolerance fails")
    p.set_defaults(fn=_cmd_sthe_run)

    p = sub.add_parser("marklof-check", help="section-hit fraction against the depth law")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--Q", type=float, required=True)
    p.add_argument("--Tprime", type=float, required=True)
    p.add_argument("--tol", type=float)
    p.set_defaults(fn=_cmd_marklof_check)

    p = sub.add_parser("disjointness-sample", help="sampled lower bound behind the disjointness budget")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_disjointness_sample)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (HorolabError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
