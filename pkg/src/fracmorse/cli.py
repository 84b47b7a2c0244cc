"""Command-line entry point: ``fracmorse {assemble,spectrum,solve,verify}``.

Exit codes: 0 success, 2 invalid configuration, 3 solver failure,
4 reaction hypotheses not satisfied (``solve`` without ``--force``),
5 verification failure.
"""

import argparse
import logging
import os
import sys

import numpy as np
from scipy.linalg import LinAlgError, cholesky

from . import io as _io
from .assembly import (Mesh1D, WeightField, assemble_stiffness, build_operators,
                       export_matrix, oracle_stiffness, ORACLE_RTOL)
from .config import RunConfig
from .errors import FracMorseError, PreconditionError, SolverError
from .reaction import check_hypotheses, example_reaction, linear_reaction, table_reaction
from .spectral import (courant_fischer_check, export_spectrum, monotonicity_check,
                       solve_eigen, spectrum_report)
from .variational import (EnergyModel, classify, gradient_check, hessian_check,
                          merge_solutions, minimize, mountain_pass, newton_multistart,
                          ramp_endpoint, export_solutions)

log = logging.getLogger("fracmorse")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_HYPOTHESES = 4
EXIT_VERIFY = 5


# -- shared builders --------------------------------------------------------

def build_reaction(cfg, lambdas):
    """Reaction plus the hypothesis family (``"H1"``/``"H2"``) and ``h``."""
    kind = cfg["reaction.kind"]
    k = cfg["reaction.k"]
    h = cfg.get("reaction.h")
    if kind in ("example_h1", "example_h2"):
        mu = cfg.get("reaction.mu")
        if mu is None:
            frac = cfg["reaction.mu_frac"]
            if kind == "example_h2":
                mu = frac * lambdas[0]
            else:
                lo = lambdas[h - 1]
                mu = lo + frac * (lambdas[h] - lo)
        r = example_reaction(mu, k, lambdas)
        if kind == "example_h1":
            return r, "H1", h
        return r, "H2", None
    if kind == "linear":
        return linear_reaction(cfg["reaction.lambda"]), "H2", None
    r = table_reaction(cfg["reaction.table_t"], cfg["reaction.table_f"])
    return r, ("H1" if h is not None else "H2"), h


def _modes_needed(cfg):
    need = cfg["reaction.k"] + 2
    if cfg.get("reaction.h") is not None:
        need = max(need, cfg["reaction.h"] + 2)
    return min(max(need, 3), cfg["mesh.n"])


def _prepare_out(path):
    os.makedirs(path, exist_ok=True)
    return path


# -- commands ---------------------------------------------------------------

def cmd_assemble(cfg):
    mesh = cfg.mesh()
    out = _prepare_out(cfg.out_dir)
    A = assemble_stiffness(mesh)
    export_matrix(mesh, A, out)
    print(f"stiffness n={mesh.n} s={mesh.s!r} -> {os.path.join(out, 'stiffness.json')}")
    return EXIT_OK


def cmd_spectrum(cfg):
    mesh = cfg.mesh()
    eta = cfg.weight(mesh)
    k_max = cfg["spectrum.k_max"]
    out = _prepare_out(cfg.out_dir)
    ops = build_operators(mesh, eta)
    es = solve_eigen(ops, k_max)
    files = export_spectrum(mesh, es, out)
    cf = [courant_fischer_check(ops, k, seed=cfg["solver.seed"], eigset=es)
          for k in range(1, min(4, k_max) + 1)]
    report = {
        "config": cfg.to_dict(),
        "weight": eta.label,
        "lambdas": es.lambdas,
        "spectrum": spectrum_report(es).to_dict(),
        "courant_fischer": [{key: v for key, v in c.items() if key != "samples"} for c in cf],
        "files": files,
    }
    _io.write_json(os.path.join(out, "report.json"), report)
    for k, lam in enumerate(es.lambdas, 1):
        print(f"lambda_{k} = {float(lam)!r}")
    return EXIT_OK


def _run_pipeline(cfg, model, es, scfg):
    pipeline = cfg["solve.pipeline"]
    points, failures = [], []
    e1 = es.vectors[:, 0]
    if pipeline in ("minimize", "all"):
        u0 = cfg["solve.start_scale"] * e1
        try:
            points.append(minimize(model, u0, scfg))
        except SolverError as exc:
            failures.append({"stage": "minimize", "error": str(exc)})
    if pipeline in ("mountain_pass", "all"):
        for sign in (1, -1):
            stage = "mountain_pass" + ("+" if sign > 0 else "-")
            try:
                trunc = model.truncated(sign)
                end = ramp_endpoint(trunc, sign * e1)
                cp = mountain_pass(trunc, end, scfg)
                full = classify(model, cp.u, "mountain_pass", scfg, cp.iterations)
                full.extra.update(cp.extra)
                points.append(full)
            except SolverError as exc:
                failures.append({"stage": stage, "error": str(exc)})
    if pipeline in ("newton_multistart", "all"):
        points.extend(newton_multistart(model, scfg.n_starts, scfg.seed, scfg, eigset=es,
                                        k=cfg["reaction.k"]))
    return merge_solutions(model, points, scfg), failures


def cmd_solve(cfg, force=False):
    cfg.validate_reaction()
    mesh = cfg.mesh()
    scfg = cfg.solver()
    ops = build_operators(mesh)
    es = solve_eigen(ops, _modes_needed(cfg))
    reaction, mode, h = build_reaction(cfg, es.lambdas)
    hyp = check_hypotheses(reaction, es, mode, cfg["reaction.k"], h=h)
    if not hyp["passed"]:
        bad = [name for name, c in hyp["clauses"].items() if not c["passed"]]
        msg = f"reaction violates {mode} clauses: {', '.join(bad)}"
        if not force:
            print(f"error: {msg} (use --force to run anyway)", file=sys.stderr)
            return EXIT_HYPOTHESES
        log.warning("%s; running because of --force", msg)
    out = _prepare_out(cfg.out_dir)
    model = EnergyModel(mesh, reaction, A=ops.A)
    points, failures = _run_pipeline(cfg, model, es, scfg)
    if failures and cfg["solve.pipeline"] != "all":
        for f in failures:
            print(f"error: {f['stage']}: {f['error']}", file=sys.stderr)
        return EXIT_SOLVER
    files = export_solutions(mesh, points, out, scfg)
    nontrivial = [p for p in points if p.nontrivial]
    summary = {
        "config": cfg.to_dict(),
        "seed": scfg.seed,
        "hypotheses_ok": bool(hyp["passed"]),
        "hypotheses": hyp,
        "n_solutions": len(nontrivial),
        "sign_classes": [p.sign_class for p in nontrivial],
        "morse_indices": [p.morse_index for p in nontrivial],
        "nullities": [p.nullity for p in nontrivial],
        "energies": [p.energy for p in nontrivial],
        "residuals_dual": [p.residual_dual for p in nontrivial],
        "zero_found": any(not p.nontrivial for p in points),
        "failures": failures,
        "files": files,
    }
    _io.write_json(os.path.join(out, "summary.json"), summary)
    print(f"{len(nontrivial)} nontrivial solution(s): "
          + (", ".join(f"{p.sign_class}/index {p.morse_index}" for p in nontrivial) or "none"))
    return EXIT_OK


def _check(results, name, fn):
    try:
        passed, detail = fn()
    except (FracMorseError, LinAlgError) as exc:
        passed, detail = False, {"error": str(exc)}
    detail = dict(detail)
    detail["passed"] = bool(passed)
    results[name] = detail


def cmd_verify(cfg):
    mesh = cfg.mesh()
    eta = cfg.weight(mesh)
    k_max = cfg["verify.k_max"]
    fault = cfg["verify.inject_fault"]
    out = _prepare_out(cfg.out_dir)

    def assemble(m):
        A = assemble_stiffness(m)
        if fault:
            A[0, 0] = -A[0, 0]
        return A

    A = assemble(mesh)
    ops = build_operators(mesh, eta, A=A)
    results = {}
    state = {}

    def oracle():
        m = Mesh1D(mesh.a, mesh.b, min(mesh.n, cfg["verify.oracle_n"]), mesh.s)
        A1, A2 = assemble(m), oracle_stiffness(m)
        err = float(np.max(np.abs(A1 - A2) / np.abs(A2)))
        return err <= ORACLE_RTOL, {"n": m.n, "max_rel_error": err}

    def definite():
        cholesky(A)
        return True, {}

    def eigen():
        es = solve_eigen(ops, k_max)
        state["es"] = es
        return bool(es.lambdas[0] > 0), {"lambda_1": float(es.lambdas[0])}

    def orthonormality():
        V = state["es"].vectors
        err = float(np.max(np.abs(V.T @ ops.M_eta @ V - np.eye(V.shape[1]))))
        return err < 1e-8, {"max_error": err}

    def signs():
        es = state["es"]
        rep = spectrum_report(es)
        lam = es.lambdas
        ok = (rep.sign_class_per_mode[0] == "one-signed"
              and all(c == "nodal" for c in rep.sign_class_per_mode[1:])
              and (lam.size < 2 or rep.gap_1_2 > 1e-6 * lam[0]))
        return ok, {"sign_classes": rep.sign_class_per_mode, "gap_1_2": rep.gap_1_2}

    def scaling():
        lam = state["es"].lambdas
        lam2 = solve_eigen(ops.with_weight(eta.scaled(2.0)), k_max).lambdas
        err = float(np.max(np.abs(2.0 * lam2 - lam) / np.abs(lam)))
        return err <= 1e-10, {"factor": 2.0, "max_rel_error": err}

    def courant_fischer():
        recs = [courant_fischer_check(ops, k, seed=cfg["solver.seed"], eigset=state["es"])
                for k in range(1, min(4, k_max) + 1)]
        return all(r["passed"] for r in recs), {
            "per_k": [{key: v for key, v in r.items() if key != "samples"} for r in recs]}

    def monotonicity():
        c = 0.5 * (mesh.a + mesh.b)
        w = 0.2 * (mesh.b - mesh.a)
        bump = mesh.interpolate(lambda x: np.exp(-((x - c) / w) ** 2))
        eta2 = WeightField(eta.values + bump, label=f"{eta.label}+bump")
        rep = monotonicity_check(mesh, eta, eta2, k_max, A=A)
        return not rep.violations, {"violations": rep.violations,
                                    "strict_modes": rep.strict_modes}

    def derivatives():
        lam = state["es"].lambdas
        if lam.size < 3:
            es = solve_eigen(build_operators(mesh, A=A), min(3, mesh.n))
            lam = es.lambdas
        r = example_reaction(0.5 * lam[0], 2, lam) if lam.size >= 2 else None
        model = EnergyModel(mesh, r, A=A)
        worst_g = worst_h = 0.0
        ok = True
        for m in (model, model.truncated(1), model.truncated(-1)):
            g = gradient_check(m, seed=cfg["solver.seed"])
            hh = hessian_check(m, seed=cfg["solver.seed"])
            ok = ok and g["passed"] and hh["passed"]
            worst_g, worst_h = max(worst_g, g["worst"]), max(worst_h, hh["worst"])
        return ok, {"gradient_worst": worst_g, "hessian_worst": worst_h}

    _check(results, "oracle_equivalence", oracle)
    _check(results, "positive_definite", definite)
    _check(results, "eigensolve", eigen)
    dependent = [("orthonormality", orthonormality), ("sign_structure", signs),
                 ("scaling", scaling), ("courant_fischer", courant_fischer),
                 ("monotonicity", monotonicity), ("derivatives", derivatives)]
    for name, fn in dependent:
        if "es" in state:
            _check(results, name, fn)
        else:
            results[name] = {"passed": False, "error": "eigensolve failed"}
    failing = [name for name, r in results.items() if not r["passed"]]
    report = {"config": cfg.to_dict(), "checks": results, "failing": failing,
              "passed": not failing}
    _io.write_json(os.path.join(out, "verify.json"), report)
    for name, r in results.items():
        print(f"{'PASS' if r['passed'] else 'FAIL'}  {name}")
    if failing:
        print(f"error: failing checks: {', '.join(failing)}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


COMMANDS = {
    "assemble": cmd_assemble,
    "spectrum": cmd_spectrum,
    "solve": cmd_solve,
    "verify": cmd_verify,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fracmorse",
        description="Fractional Laplacian eigenpairs and semilinear critical points on an interval.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="flat key = value config file")
    parser.add_argument("--seed", type=int, default=None, help="overrides solver.seed")
    parser.add_argument("--force", action="store_true",
                        help="solve even if the reaction hypotheses fail")
    parser.add_argument("--out", default=None, help="output directory (overrides output.dir)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.from_file(args.config, out_dir=args.out, seed=args.seed)
        if args.command == "solve":
            return cmd_solve(cfg, force=args.force)
        return COMMANDS[args.command](cfg)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FracMorseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
