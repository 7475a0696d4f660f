"""Command-line front end: reproducible runs with JSON/CSV reports.

Exit codes: 0 success, 1 analysis-level failure, 2 input error.  Every
report embeds the configuration that produced it and a schema version, and
identical configurations with identical seeds produce byte-identical
output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import analysis, bethe, generators, lbp, oracle, zeta
from .errors import BetheZetaError, SchemaError
from .model import model_from_json

SCHEMA_VERSION = 1


def _load_model(path):
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc
    return model_from_json(obj)


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value):
            return [[float(v.real), float(v.imag)] for v in value]
        return value.tolist()
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _emit(report, args):
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report(command, config, result):
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "result": result,
    }


def _point_from_file(path, g):
    obj = _load_json(path)
    try:
        q = bethe.Pseudomarginals(np.array(obj["m"], float), np.array(obj["chi"], float))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"invalid point file {path}: {exc}") from exc
    if q.m.shape != (g.n_vertices,) or q.chi.shape != (g.n_edges,):
        raise SchemaError("point dimensions do not match the graph")
    return q


def _record_dict(rec):
    return {
        "m": rec.q.m,
        "chi": rec.q.chi,
        "grad_norm": rec.grad_norm,
        "index": rec.index,
        "hessian_det_sign": rec.hessian_det_sign,
        "log_abs_hessian_det": rec.log_abs_hessian_det,
        "stability": rec.stability.value,
        "spectrum": rec.spectrum.eigenvalues,
        "spectral_radius": rec.spectrum.spectral_radius,
        "max_real_part": rec.spectrum.max_real_part,
    }


def cmd_lbp(args):
    model = _load_model(args.model)
    g = model.graph
    rng = np.random.default_rng(args.seed)
    if args.init == "uniform":
        init = lbp.MessageState.uniform(g)
    elif args.init == "random":
        init = lbp.MessageState(rng.normal(0.0, 1.0, size=g.n_directed))
    else:
        obj = _load_json(args.init)
        init = (
            lbp.MessageState(np.array(obj["log_eta"], float))
            if "log_eta" in obj
            else lbp.MessageState.from_eta(np.array(obj["eta"], float))
        )
    run = lbp.lbp_run(model, init=init, damping=args.damping, tol=args.tol, max_iter=args.max_iter)
    result = {
        "converged": run.converged,
        "iterations": run.iterations,
        "residual": run.residual,
        "m": run.beliefs.m,
        "chi": run.beliefs.chi,
    }
    if run.converged and g.simple:
        result["spectrum"] = analysis.spectrum_um(g, run.beliefs).eigenvalues
    config = {
        "model": args.model,
        "damping": args.damping,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "init": args.init,
        "seed": args.seed,
    }
    _emit(_report("lbp", config, result), args)
    return 0 if run.converged else 1


def cmd_bethe(args):
    model = _load_model(args.model)
    g = model.graph
    q = _point_from_file(args.point, g)
    value = bethe.free_energy(model, q)
    grad = bethe.gradient(model, q)
    eigs = np.linalg.eigvalsh(bethe.hessian(g, q).full)
    result = {
        "free_energy": value,
        "grad_norm": float(np.max(np.abs(grad))),
        "hessian_eigenvalues": eigs,
        "margin": bethe.in_domain(g, q).margin,
    }
    _emit(_report("bethe", {"model": args.model, "point": args.point}, result), args)
    return 0


def cmd_zeta(args):
    model = _load_model(args.model)
    g = model.graph
    forms = tuple(args.forms.split(","))
    q = None
    if args.weights == "from-beliefs":
        run = lbp.lbp_run(model, damping=args.damping, tol=args.tol, max_iter=args.max_iter)
        if not run.converged:
            print("lbp did not converge; cannot derive weights", file=sys.stderr)
            return 1
        q = run.beliefs
        u = zeta.weights_from_pseudomarginals(g, q)
    else:
        obj = _load_json(args.weights)
        try:
            u = zeta.EdgeWeights(np.array(obj["u"], float))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"invalid weights file: {exc}") from exc
    report = zeta.compute_zeta_report(g, u, forms=forms, max_len=args.max_len, q=q)
    result = {
        "det_form": report.det_form,
        "ihara_form": report.ihara_form,
        "product_form": report.product_form,
        "product_bound": report.product_bound,
        "truncation_len": report.truncation_len,
        "main_formula_rhs": report.main_formula_rhs,
    }
    config = {
        "model": args.model,
        "weights": args.weights,
        "forms": args.forms,
        "max_len": args.max_len,
        "seed": args.seed,
    }
    _emit(_report("zeta", config, result), args)
    return 0


def cmd_analyze(args):
    model = _load_model(args.model)
    config = {
        "model": args.model,
        "restarts": args.restarts,
        "grid": args.grid,
        "tol": args.tol,
        "seed": args.seed,
    }
    certificate = analysis.uniqueness_certificate(model)
    try:
        report = analysis.index_sum_check(
            model, n_restarts=args.restarts, grid_spec=args.grid, tol=args.tol, seed=args.seed
        )
    except BetheZetaError as exc:
        _emit(
            _report(
                "analyze",
                config,
                {
                    "error": str(exc),
                    "certificate": {
                        "kind": certificate.kind.value,
                        "evidence": certificate.evidence,
                    },
                },
            ),
            args,
        )
        return 1
    result = {
        "fixed_points": [_record_dict(rec) for rec in report.records],
        "index_sum": report.index_sum,
        "count": report.count,
        "passed": report.passed,
        "retried": report.retried,
        "certificate": {"kind": certificate.kind.value, "evidence": certificate.evidence},
    }
    _emit(_report("analyze", config, result), args)
    return 0 if report.passed else 1


def cmd_sweep(args):
    model = _load_model(args.model)
    report = analysis.saddle_crossing_track(
        model, t_range=(args.t_start, args.t_stop), steps=args.steps
    )
    buf = io.StringIO()
    config = {
        "model": args.model,
        "t_start": args.t_start,
        "t_stop": args.t_stop,
        "steps": args.steps,
        "seed": args.seed,
    }
    buf.write(f"# schema_version={SCHEMA_VERSION} config={json.dumps(config, sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "max_re_lambda", "rho", "det_sign", "log_abs_det", "F"])
    for k, t in enumerate(report.t_grid):
        writer.writerow(
            [
                f"{t:.10g}",
                f"{report.max_real_eig[k]:.12g}",
                f"{report.spectral_radii[k]:.12g}",
                report.det_signs[k],
                f"{report.log_abs_dets[k]:.12g}",
                f"{report.free_energies[k]:.12g}",
            ]
        )
    text = buf.getvalue()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if report.t_eig_cross is not None:
        print(f"# eigenvalue crossing at t = {report.t_eig_cross:.8f}", file=sys.stderr)
    if report.t_det_cross is not None:
        print(f"# determinant sign change at t = {report.t_det_cross:.8f}", file=sys.stderr)
    return 0


def cmd_certify(args):
    model = _load_model(args.model)
    certificate = analysis.uniqueness_certificate(model)
    result = {"kind": certificate.kind.value, "evidence": certificate.evidence}
    _emit(_report("certify", {"model": args.model}, result), args)
    return 0


def cmd_oracle(args):
    model = _load_model(args.model)
    exact = oracle.exact_inference(model)
    result = {
        "log_z": exact.log_z,
        "marginal_plus": exact.marginal_plus,
        "means": exact.means,
        "correlations": exact.correlations,
    }
    run = lbp.lbp_run(model, damping=args.damping, tol=args.tol, max_iter=args.max_iter)
    if run.converged:
        result["bethe_gap"] = bethe.free_energy(model, run.beliefs) + exact.log_z
    else:
        result["bethe_gap"] = None
    _emit(_report("oracle", {"model": args.model, "seed": args.seed}, result), args)
    return 0


def _random_graph_and_point(rng, max_vertices=8):
    from .generators import _random_connected_edges
    from .graph import Graph

    n = int(rng.integers(3, max_vertices + 1))
    m_max = n * (n - 1) // 2
    m = int(rng.integers(n - 1, m_max + 1))
    g = Graph(n, _random_connected_edges(rng, n, m))
    q = lbp.random_interior_point(g, rng, m_scale=0.7, margin_frac=0.15)
    return g, q


def cmd_verify(args):
    rng = np.random.default_rng(args.seed)
    config = {"suite": args.suite, "trials": args.trials, "seed": args.seed}
    if args.suite == "main-formula":
        worst = 0.0
        signs_ok = True
        for _ in range(args.trials):
            g, q = _random_graph_and_point(rng)
            rep = zeta.verify_main_formula(g, q)
            worst = max(worst, abs(rep.log_residual))
            signs_ok = signs_ok and rep.signs_agree
        passed = worst <= 1e-8 and signs_ok
        result = {"max_log_residual": worst, "signs_agree": signs_ok, "passed": passed}
    elif args.suite == "ihara":
        worst = 0.0
        for _ in range(args.trials):
            g, _ = _random_graph_and_point(rng)
            u = zeta.EdgeWeights(rng.uniform(-0.9, 0.9, size=g.n_directed))
            det = zeta.zeta_det(g, u)
            ihara = zeta.zeta_ihara(g, u)
            worst = max(worst, abs(det - ihara) / max(1e-30, abs(det)))
        passed = worst <= 1e-10
        result = {"max_relative_error": worst, "passed": passed}
    else:
        raise SchemaError(f"unknown suite {args.suite!r}")
    _emit(_report("verify", config, result), args)
    return 0 if passed else 1


def cmd_generate(args):
    obj = generators.builtin_graphs(
        args.name, n=args.n, m=args.m, j=args.j, h=args.h, seed=args.seed
    )
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bethezeta",
        description="Belief propagation, Bethe free energy, and edge zeta analyses",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, model=True):
        if model:
            p.add_argument("model", help="model JSON file")
        p.add_argument("--output", help="write the report here instead of stdout")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("lbp", help="run damped loopy belief propagation")
    add_common(p)
    p.add_argument("--damping", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=5000)
    p.add_argument("--init", default="uniform", help="uniform | random | <messages.json>")
    p.set_defaults(func=cmd_lbp)

    p = sub.add_parser("bethe", help="evaluate the free energy at a point")
    p.add_argument("action", choices=["eval"])
    add_common(p)
    p.add_argument("--point", required=True, help='JSON file {"m": [...], "chi": [...]}')
    p.set_defaults(func=cmd_bethe)

    p = sub.add_parser("zeta", help="evaluate the edge zeta representations")
    add_common(p)
    p.add_argument("--weights", default="from-beliefs", help="from-beliefs | <weights.json>")
    p.add_argument("--forms", default="det,ihara", help="comma list from det,ihara,product")
    p.add_argument("--max-len", type=int, default=None)
    p.add_argument("--damping", type=float, default=0.3)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=5000)
    p.set_defaults(func=cmd_zeta)

    p = sub.add_parser("analyze", help="enumerate fixed points and audit the index sum")
    add_common(p)
    p.add_argument("--restarts", type=int, default=200)
    p.add_argument("--grid", type=int, default=3)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="temperature sweep of an attractive family (CSV)")
    add_common(p)
    p.add_argument("--t-start", type=float, default=2.0)
    p.add_argument("--t-stop", type=float, default=1.2)
    p.add_argument("--steps", type=int, default=17)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("certify", help="fixed-point uniqueness certificate")
    add_common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("oracle", help="exact inference by enumeration")
    add_common(p)
    p.add_argument("--damping", type=float, default=0.3)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=5000)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify", help="randomised identity verification suites")
    add_common(p, model=False)
    p.add_argument("--suite", default="main-formula", choices=["main-formula", "ihara"])
    p.add_argument("--trials", type=int, default=200)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("generate", help="emit a built-in model JSON")
    p.add_argument("name", choices=generators.GENERATOR_NAMES)
    p.add_argument("--output")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--j", type=float, default=1.0)
    p.add_argument("--h", type=float, default=0.0)
    p.set_defaults(func=cmd_generate)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    except BetheZetaError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
