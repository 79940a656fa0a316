"""Command-line interface: ``varindex analyze | family | simulate | convergence``.

Exit codes: 0 success, 2 input or specification error, 3 numeric or
feasibility failure.  Errors go to standard error; nothing is written to
standard output when a command fails.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from ._rng import derive_seed
from .asymptotics import asymptotic_ci, sigma2_gvi, sigma2_mvi
from .core import (DataError, Dataset, NumericError, correlation_from_cov, load_csv, summarize,
                   write_csv)
from .indexes import DEFAULT_TOL, IndexValue, classify, gvi, marginal_vi, mvi
from .norta import (MarginalSpec, ScenarioSpec, load_scenario, marginal_stats, norta_sample,
                    plan_gaussian, scenario_moments)
from .resampling import bootstrap_indexes

log = logging.getLogger("varindex")

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
DEFAULT_BUDGET = 50_000_000


# ------------------------------------------------------------------ formatting

def _round(x, precision):
    if isinstance(x, dict):
        return {k: _round(v, precision) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v, precision) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)) and not isinstance(x, IndexValue):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not np.isfinite(x):
            return None
        return float(f"{x:.{precision}g}")
    return x


def _fmt(x, precision):
    if x is None:
        return "NA"
    return f"{float(x):.{precision}g}"


def _emit(obj, fmt, precision, text_renderer, out=None):
    out = out or sys.stdout
    rounded = _round(obj, precision)
    if fmt == "json":
        json.dump(rounded, out, indent=2)
        out.write("\n")
    else:
        out.write(text_renderer(rounded, precision))


# ------------------------------------------------------------------ analyze

def build_report(data: Dataset, level=0.95, tol=DEFAULT_TOL, bootstrap=None, seed=0,
                 centered=False) -> dict:
    """Table-3 style report for a dataset as a plain dict."""
    ms = summarize(data)
    k = ms.k
    g, m = gvi(ms), mvi(ms)
    corr = correlation_from_cov(ms)
    s2g = sigma2_gvi(data, centered=centered).sigma2
    s2m = sigma2_mvi(data, centered=centered).sigma2
    ci_g = asymptotic_ci(float(g), s2g, data.n, level)
    ci_m = asymptotic_ci(float(m), s2m, data.n, level)
    vis = marginal_vi(ms)
    names = list(data.names) if data.names else [f"Y{j + 1}" for j in range(k)]
    m4 = ms.mean**4
    ref = float(np.sum(m4) / np.sum(ms.mean**2) ** 2)
    report = {
        "schema_version": SCHEMA_VERSION,
        "n": data.n,
        "k": k,
        "names": names,
        "mean": ms.mean.tolist(),
        "cov": ms.cov.tolist(),
        "corr": corr.tolist(),
        "det_corr": float(np.linalg.det(corr)),
        "gvi": float(g),
        "mvi": float(m),
        "sigma2_gvi": s2g,
        "sigma2_mvi": s2m,
        "se_gvi": float(np.sqrt(s2g / data.n)),
        "se_mvi": float(np.sqrt(s2m / data.n)),
        "moment_covariance": "centered" if centered else "raw",
        "ci_gvi": ci_g.to_dict(),
        "ci_mvi": ci_m.to_dict(),
        "tolerance": tol,
        "classification_gvi": classify(g, tol).label,
        "classification_mvi": classify(m, tol).label,
        "per_margin": [
            {"name": names[j], "mean": float(ms.mean[j]), "variance": float(ms.cov[j, j]),
             "vi": float(vis[j]), "class": classify(vis[j], tol).label}
            for j in range(k)
        ],
        "reference": {
            "uncorrelated_exponential_gvi": ref,
            "rvi_vs_uncorrelated_exponential": float(g) / ref,
            "excess_gvi": 1 + float(g) - float(m),
            "note": ("gvi is the literal quadratic-form ratio; the uncorrelated exponential "
                     "with the same mean has gvi = sum m^4 / (sum m^2)^2, which is 1 only "
                     "when k = 1. excess_gvi = 1 + gvi - mvi is the correlation-only "
                     "departure, equal to 1 for uncorrelated data."),
        },
        "bootstrap": None,
    }
    if k == 1:
        report["note"] = "k = 1: gvi and mvi both equal the univariate variation index"
    if bootstrap:
        report["bootstrap"] = bootstrap_indexes(data, bootstrap, seed, level).to_dict()
    return report


def render_report(r: dict, precision: int) -> str:
    f = lambda x: _fmt(x, precision)
    lines = [f"n = {r['n']}, k = {r['k']}, det(corr) = {f(r['det_corr'])}"]
    head = ["j", "name", "mean", "variance", "VI (MV)"] + [f"rho_j{i + 1}" for i in range(r["k"])]
    rows = []
    for j, pm in enumerate(r["per_margin"]):
        rows.append([str(j + 1), pm["name"], f(pm["mean"]), f(pm["variance"]),
                     f"{f(pm['vi'])} ({pm['class'][0]})"] + [f(c) for c in r["corr"][j]])
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(head)]
    lines.append("  ".join(h.rjust(w) for h, w in zip(head, widths)))
    for row in rows:
        lines.append("  ".join(c.rjust(w) for c, w in zip(row, widths)))
    lvl = r["ci_gvi"]["level"]
    lines.append("")
    for name in ("gvi", "mvi"):
        ci = r[f"ci_{name}"]
        lines.append(f"{name.upper()} = {f(r[name])}  ({r['classification_' + name]}, tol "
                     f"{f(r['tolerance'])})  se = {f(r['se_' + name])}  "
                     f"{f(100 * lvl)}% CI [{f(ci['lower'])}, {f(ci['upper'])}]")
    lines.append(f"delta-method moment covariance: {r['moment_covariance']}")
    ref = r["reference"]
    lines.append(f"uncorrelated-exponential reference GVI = {f(ref['uncorrelated_exponential_gvi'])}, "
                 f"RVI = {f(ref['rvi_vs_uncorrelated_exponential'])}, "
                 f"excess GVI = {f(ref['excess_gvi'])}")
    if r.get("note"):
        lines.append(r["note"])
    b = r.get("bootstrap")
    if b:
        lines.append(f"bootstrap (B = {b['replicates']}, seed = {b['seed']}): "
                     f"se_gvi = {f(b['se_gvi'])}, se_mvi = {f(b['se_mvi'])}")
        for name in ("gvi", "mvi"):
            nc, pc = b[f"normal_ci_{name}"], b[f"percentile_ci_{name}"]
            lines.append(f"  {name.upper()} normal [{f(nc['lower'])}, {f(nc['upper'])}]  "
                         f"percentile [{f(pc['lower'])}, {f(pc['upper'])}]")
    return "\n".join(lines) + "\n"


def cmd_analyze(args) -> int:
    data = load_csv(args.input, has_header=args.header)
    report = build_report(data, level=args.level, tol=args.tol, bootstrap=args.bootstrap,
                          seed=args.seed, centered=args.moments == "centered")
    _emit(report, args.format, args.precision, render_report)
    return EXIT_OK


# ------------------------------------------------------------------ family

def family_report(name: str, params: dict, mean=None, n=None, seed=0, tol=DEFAULT_TOL) -> dict:
    from . import families as fam

    name = name.lower()
    out = {"schema_version": SCHEMA_VERSION, "family": name, "params": params}
    try:
        if name in ("exp", "exponential"):
            p = fam.ExpFamilyParams(params["mu"], params.get("rho", np.eye(len(params["mu"]))))
            ms = fam.exp_moments(p)
            out.update(form="closed", mean=ms.mean.tolist(), cov=ms.cov.tolist(),
                       gvi=float(gvi(ms)), mvi=float(mvi(ms)),
                       excess_gvi=float(fam.exp_excess_gvi(p)))
        elif name in ("mo", "marshall-olkin"):
            p = fam.MarshallOlkinParams(params["mu"], params["mu0"])
            ms = fam.mo_moments(p)
            ix = fam.mo_indexes(p)
            out.update(form="closed", mean=ms.mean.tolist(), cov=ms.cov.tolist(),
                       gvi=float(ix["gvi"]), mvi=float(ix["mvi"]),
                       excess_gvi=float(ix["excess_gvi"]))
        elif name in ("an", "arnold-ng"):
            p = fam.ArnoldNgParams(*(float(params[key]) for key in
                                     ("alpha0", "alpha1", "alpha2", "alpha1p", "alpha2p")))
            r = fam.an_indexes_mc(p, int(n or 100_000), seed)
            out.update(form="monte-carlo", n=int(n or 100_000), seed=seed,
                       margins=fam.an_margin_stats(p), gvi=r["gvi"], mvi=r["mvi"],
                       rho=r["rho"], mc_se=r["mc_se"], mvi_exact=fam.an_mvi_exact(p))
        elif name in ("tg", "teimouri-gupta"):
            p = fam.TeimouriGuptaParams(*(float(params[key]) for key in
                                          ("alpha1", "alpha2", "beta1", "beta2", "gamma", "delta")))
            r = fam.tg_indexes(p)
            out.update(form="closed", margins=r["margins"], rho=r["rho"], gvi=float(r["gvi"]),
                       mvi=float(r["mvi"]), cross=r["cross"])
        elif name in ("weibull-margin", "weibull"):
            beta = float(params["beta"])
            spec = MarginalSpec.weibull(float(params.get("alpha", 1.0)), beta)
            st = marginal_stats(spec)
            out.update(form="closed", mean=st["mean"], variance=st["variance"], vi=st["vi"],
                       shape_ratio=float(fam.weibull_shape_ratio(beta)),
                       **{"class": fam.weibull_variation_class(beta, tol).label})
        elif name == "mst":
            from .indexes import gvi_function, mvi_function

            p = fam.MstParams(params["p"], params.get("lambda", params.get("lam", 1.0)))
            if mean is None:
                mean = params.get("m")
            if mean is None:
                raise DataError("the mst family needs a mean vector (--mean)")
            V = fam.mst_variance_function(p)
            out.update(form="closed", mean=list(map(float, mean)),
                       variance_function=V(np.asarray(mean, float)).tolist(),
                       gvi=float(gvi_function(V, mean)), mvi=float(mvi_function(V, mean)))
        else:
            raise DataError(f"unknown family {name!r}")
    except KeyError as exc:
        raise DataError(f"family {name!r} is missing parameter {exc}") from None
    except TypeError as exc:
        raise DataError(f"bad parameters for family {name!r}: {exc}") from None
    for key in ("gvi", "mvi", "excess_gvi"):
        if key in out:
            out[f"class_{key}"] = classify(out[key], tol).label
    return out


def render_family(r: dict, precision: int) -> str:
    f = lambda x: _fmt(x, precision)
    lines = [f"family: {r['family']}  ({r['form']})"]
    for key in ("mean", "variance", "vi", "shape_ratio", "rho", "gvi", "mvi", "excess_gvi",
                "cross", "mc_se", "mvi_exact", "class"):
        if key in r:
            v = r[key]
            s = "[" + ", ".join(f(x) for x in v) + "]" if isinstance(v, list) else (
                v if isinstance(v, str) else f(v))
            label = {"gvi": "GVI (canonical)", "mvi": "MVI (canonical)",
                     "excess_gvi": "GVI (excess form)"}.get(key, key)
            cls = r.get(f"class_{key}")
            lines.append(f"  {label} = {s}" + (f"  ({cls})" if cls else ""))
    return "\n".join(lines) + "\n"


def cmd_family(args) -> int:
    try:
        params = json.loads(args.params) if args.params else {}
    except json.JSONDecodeError as exc:
        raise DataError(f"--params is not valid JSON: {exc}") from None
    mean = None
    if args.mean:
        try:
            mean = [float(x) for x in args.mean.split(",")]
        except ValueError:
            raise DataError("--mean must be a comma-separated list of numbers") from None
    report = family_report(args.family, params, mean=mean, n=args.n, seed=args.seed, tol=args.tol)
    _emit(report, args.format, args.precision, render_family)
    return EXIT_OK


# ------------------------------------------------------------------ simulate

def simulate(spec: ScenarioSpec, output, precision: int = 17) -> dict:
    plan = plan_gaussian(spec)
    data = norta_sample(spec, plan)
    achieved = np.corrcoef(data.values, rowvar=False) if spec.k > 1 else np.ones((1, 1))
    from .norta import pair_correlation

    quad = np.eye(spec.k)
    for i in range(spec.k):
        for j in range(i + 1, spec.k):
            quad[i, j] = quad[j, i] = pair_correlation(spec.marginals[i], spec.marginals[j],
                                                      plan.repaired[i, j])
    sidecar = {
        "schema_version": SCHEMA_VERSION,
        "scenario": spec.to_dict(),
        **plan.to_dict(),
        "repaired": plan.repair_change > 0,
        "target_corr": spec.target_corr.tolist(),
        "quadrature_corr": quad.tolist(),
        "achieved_corr": np.atleast_2d(achieved).tolist(),
        "max_abs_corr_error": float(np.max(np.abs(np.atleast_2d(achieved) - spec.target_corr))),
        "n": spec.n,
        "seed": spec.seed,
    }
    output = Path(output)
    write_csv(data, output, precision)
    Path(str(output) + ".json").write_text(json.dumps(sidecar, indent=2) + "\n", encoding="utf-8")
    return sidecar


def cmd_simulate(args) -> int:
    spec = load_scenario(args.scenario)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.n is not None:
        changes["n"] = args.n
    if changes:
        spec = spec.with_(**changes)
    side = simulate(spec, args.output)
    print(f"wrote {spec.n} rows x {spec.k} columns to {args.output} "
          f"(max |achieved - target| corr = {side['max_abs_corr_error']:.4f})", file=sys.stderr)
    return EXIT_OK


# ------------------------------------------------------------------ convergence

def convergence_study(spec: ScenarioSpec, sizes, replicates: int = 100, seed: int = 0,
                      budget: int = DEFAULT_BUDGET, level: float = 0.95, centered: bool = False):
    """Nested-subsample study: each replicate draws ``max(sizes)`` rows and uses prefixes.

    Returns ``(table_rows, long_rows)``; table rows hold replicate medians.
    """
    sizes = [int(s) for s in sizes]
    if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise DataError("sizes must be a strictly ascending list")
    if sizes[0] < 2:
        raise DataError("sizes must be at least 2")
    if replicates < 1:
        raise DataError("replicates must be positive")
    if sizes[-1] * replicates > budget:
        raise DataError(f"max size x replicates = {sizes[-1] * replicates} exceeds budget {budget}")
    plan = plan_gaussian(spec)
    per = {n: [] for n in sizes}
    long_rows = []
    for r in range(replicates):
        full = norta_sample(spec.with_(n=sizes[-1], seed=derive_seed(spec.seed, r)), plan)
        for n in sizes:
            d = Dataset(full.values[:n])
            ms = summarize(d)
            g, m = float(gvi(ms)), float(mvi(ms))
            sg = sigma2_gvi(d, centered=centered).sigma2
            sm = sigma2_mvi(d, centered=centered).sigma2
            try:
                det = float(np.linalg.det(correlation_from_cov(ms)))
            except NumericError:
                det = float("nan")
            hg = asymptotic_ci(g, sg, n, level).halfwidth
            hm = asymptotic_ci(m, sm, n, level).halfwidth
            per[n].append((det, sg, sm, g, hg, m, hm))
            long_rows.append({"replicate": r, "n": n, "index": "GVI", "value": g})
            long_rows.append({"replicate": r, "n": n, "index": "MVI", "value": m})
    table = []
    for n in sizes:
        a = np.median(np.array(per[n]), axis=0)
        table.append({"n": n, "det_corr": a[0], "sigma2_gvi": a[1], "sigma2_mvi": a[2],
                      "gvi": a[3], "gvi_halfwidth": a[4], "mvi": a[5], "mvi_halfwidth": a[6],
                      "replicates": replicates})
    return table, long_rows


def _write_rows(path, rows, precision):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (_fmt(v, precision) if isinstance(v, (float, np.floating)) else v)
                        for k, v in row.items()})


def cmd_convergence(args) -> int:
    spec = load_scenario(args.scenario)
    seed = spec.seed if args.seed is None else args.seed
    spec = spec.with_(seed=seed)
    table, long_rows = convergence_study(spec, args.sizes, args.replicates, seed, args.budget,
                                         centered=args.moments == "centered")
    prefix = args.output_prefix
    _write_rows(f"{prefix}_table.csv", table, args.precision)
    _write_rows(f"{prefix}_boxplot.csv", long_rows, args.precision)
    for row in table:
        print(f"n={row['n']:>7}  det={_fmt(row['det_corr'], args.precision)}  "
              f"GVI={_fmt(row['gvi'], args.precision)} +/- {_fmt(row['gvi_halfwidth'], args.precision)}  "
              f"MVI={_fmt(row['mvi'], args.precision)} +/- {_fmt(row['mvi_halfwidth'], args.precision)}")
    return EXIT_OK


# ------------------------------------------------------------------ parser

def _sizes(text):
    try:
        return [int(float(s)) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("sizes must be comma-separated integers") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="varindex", description="Multivariate variation indexes.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--precision", type=int, default=6, help="significant digits (default 6)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="indexes, standard errors and intervals for a CSV dataset")
    a.add_argument("input")
    a.add_argument("--header", action="store_true", help="first row holds variable names")
    a.add_argument("--level", type=float, default=0.95)
    a.add_argument("--bootstrap", type=int, metavar="B", default=None)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--tol", type=float, default=DEFAULT_TOL, help="equi-variation band")
    a.add_argument("--moments", choices=("raw", "centered"), default="raw",
                   help="moment covariance used by the delta method")
    a.add_argument("--format", choices=("text", "json"), default="text")
    a.set_defaults(func=cmd_analyze)

    f = sub.add_parser("family", help="closed-form indexes of a parametric family")
    f.add_argument("family", choices=("exp", "mo", "an", "tg", "weibull-margin", "mst"))
    f.add_argument("--params", default="{}", help="JSON object of family parameters")
    f.add_argument("--mean", default=None, help="comma-separated mean vector (mst)")
    f.add_argument("--n", type=int, default=None, help="Monte-Carlo size (an)")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--tol", type=float, default=DEFAULT_TOL)
    f.add_argument("--format", choices=("text", "json"), default="text")
    f.set_defaults(func=cmd_family)

    s = sub.add_parser("simulate", help="draw a NORTA dataset from a scenario JSON")
    s.add_argument("scenario", help="scenario JSON path or bundled scenario name")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--n", type=int, default=None)
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("convergence", help="subsample convergence study with boxplot CSV")
    c.add_argument("scenario")
    c.add_argument("--sizes", type=_sizes, default=_sizes("50,100,300,500,1000,3000,5000,10000"))
    c.add_argument("--replicates", type=int, default=100)
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    c.add_argument("--moments", choices=("raw", "centered"), default="raw")
    c.add_argument("-o", "--output-prefix", required=True)
    c.set_defaults(func=cmd_convergence)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    from .norta import InfeasibleCorrelationError

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except InfeasibleCorrelationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
