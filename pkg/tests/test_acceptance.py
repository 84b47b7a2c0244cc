"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test prints a ``criterion N PASS|FAIL`` line; the lines are repeated in
the ``acceptance criteria`` section of the pytest terminal summary.
"""

import hashlib
import os
import time

import numpy as np
import pytest

from fracmorse import (Mesh1D, WeightField, build_operators, assemble_stiffness,
                       oracle_stiffness, solve_eigen, spectrum_report, courant_fischer_check,
                       monotonicity_check, example_reaction, linear_reaction, EnergyModel,
                       SolverConfig, newton_multistart, mountain_pass, morse_data, classify)
from fracmorse.variational import (gradient_check, hessian_check, merge_solutions,
                                   ramp_endpoint)
from fracmorse.cli import main

S_VALUES = (0.25, 0.5, 0.75)


def _weights(mesh):
    return {
        "constant": WeightField.constant(mesh.n, 1.0),
        "bump": WeightField.bump(mesh),
        "ramp": WeightField.ramp(mesh, 1.0, 2.0),
    }


def test_criterion_01_oracle_equivalence(acceptance):
    t0 = time.perf_counter()
    worst = 0.0
    for n in (4, 8, 16, 32):
        for s in S_VALUES:
            mesh = Mesh1D(-1.0, 1.0, n, s)
            A, B = assemble_stiffness(mesh), oracle_stiffness(mesh)
            worst = max(worst, float(np.max(np.abs(A - B) / np.abs(B))))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-8 and elapsed < 60
    acceptance(1, "assembly matches oracle", ok,
               f"max rel err {worst:.2e}, {elapsed:.1f} s")
    assert ok


def test_criterion_02_spectral_structure(acceptance):
    t0 = time.perf_counter()
    failures = []
    worst_orth = 0.0
    for s in S_VALUES:
        mesh = Mesh1D(-1.0, 1.0, 256, s)
        base = build_operators(mesh)
        for label, eta in _weights(mesh).items():
            es = solve_eigen(base.with_weight(eta), 6)
            lam, V = es.lambdas, es.vectors
            rep = spectrum_report(es)
            orth = float(np.max(np.abs(V.T @ base.with_weight(eta).M_eta @ V - np.eye(6))))
            worst_orth = max(worst_orth, orth)
            ok = (lam[0] > 0 and lam[1] - lam[0] > 1e-6 * lam[0]
                  and rep.sign_class_per_mode[0] == "one-signed"
                  and all(c == "nodal" for c in rep.sign_class_per_mode[1:6])
                  and orth < 1e-8)
            if not ok:
                failures.append((s, label))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 120
    acceptance(2, "spectral structure at n=256", ok,
               f"failures {failures}, orth residual {worst_orth:.1e}, {elapsed:.1f} s")
    assert ok


def test_criterion_03_scaling_law(acceptance):
    worst = 0.0
    for s in S_VALUES:
        mesh = Mesh1D(-1.0, 1.0, 128, s)
        base = build_operators(mesh)
        for eta in _weights(mesh).values():
            lam = solve_eigen(base.with_weight(eta), 6).lambdas
            for c in (0.5, 2.0, 10.0):
                lam_c = solve_eigen(base.with_weight(eta.scaled(c)), 6).lambdas
                worst = max(worst, float(np.max(np.abs(lam_c - lam / c) / (lam / c))))
    ok = worst <= 1e-10
    acceptance(3, "lambda_k(c eta) = lambda_k(eta) / c", ok, f"max rel err {worst:.1e}")
    assert ok


def test_criterion_04_monotonicity(acceptance):
    violations, margins = [], []
    for s in S_VALUES:
        mesh = Mesh1D(-1.0, 1.0, 256, s)
        bump = WeightField.bump(mesh).values - 1.0
        for label in ("constant", "ramp"):
            eta1 = _weights(mesh)[label]
            eta2 = WeightField(eta1.values + bump, label=f"{label}+bump")
            rep = monotonicity_check(mesh, eta1, eta2, 6)
            violations += [(s, label, k) for k in rep.violations]
            margins += [r["relative_margin"] for r in rep.monotonicity_records]
    ok = not violations
    acceptance(4, "weight monotonicity", ok,
               f"violations {violations}, strict margin min {min(margins):.3e}")
    assert ok


def test_criterion_05_courant_fischer(acceptance):
    worst_excess, worst_attain = -np.inf, 0.0
    for s in S_VALUES:
        mesh = Mesh1D(-1.0, 1.0, 128, s)
        ops = build_operators(mesh, WeightField.ramp(mesh, 1.0, 2.0))
        es = solve_eigen(ops, 4)
        for k in range(1, 5):
            rep = courant_fischer_check(ops, k, trials=100, seed=k, eigset=es)
            worst_excess = max(worst_excess, rep["max_excess"])
            worst_attain = max(worst_attain, rep["attain_error"])
    ok = worst_excess <= 1e-10 and worst_attain <= 1e-8
    acceptance(5, "Courant-Fischer sampling", ok,
               f"max excess {worst_excess:.1e}, attain err {worst_attain:.1e}")
    assert ok


def test_criterion_06_derivative_checks(acceptance):
    mesh = Mesh1D(-1.0, 1.0, 64, 0.5)
    ops = build_operators(mesh)
    lam = solve_eigen(ops, 4).lambdas
    reactions = {
        "sublinear": example_reaction(0.5 * lam[0], 2, lam),
        "crossing": example_reaction(0.5 * (lam[0] + lam[1]), 2, lam),
    }
    worst_g = worst_h = 0.0
    ok = True
    for r in reactions.values():
        model = EnergyModel(mesh, r, A=ops.A)
        for m in (model, model.truncated(1), model.truncated(-1)):
            g = gradient_check(m, probes=20, seed=0, rtol=1e-6, amplitude=2.0)
            h = hessian_check(m, probes=20, seed=0, rtol=1e-5, amplitude=2.0)
            ok = ok and g["passed"] and h["passed"]
            worst_g, worst_h = max(worst_g, g["worst"]), max(worst_h, h["worst"])
    acceptance(6, "gradient / Hessian finite differences", ok,
               f"worst {worst_g:.1e} / {worst_h:.1e}")
    assert ok


@pytest.fixture(scope="module")
def three_solution_setup():
    mesh = Mesh1D(-1.0, 1.0, 128, 0.5)
    ops = build_operators(mesh)
    es = solve_eigen(ops, 6)
    r = example_reaction(0.5 * es.lambdas[0], 2, es.lambdas)
    return mesh, EnergyModel(mesh, r, A=ops.A), es


def _three_solution_run(model, es, seed):
    cfg = SolverConfig(seed=seed, n_starts=64)
    points = list(newton_multistart(model, 64, seed, cfg, eigset=es, k=2))
    degenerate = False
    for sign in (1, -1):
        trunc = model.truncated(sign)
        cp = mountain_pass(trunc, ramp_endpoint(trunc, sign * es.vectors[:, 0]), cfg)
        full = classify(model, cp.u, "mountain_pass", cfg)
        if full.nullity:
            degenerate = True
        elif (full.morse_index, full.nullity) != (1, 0):
            return False, points, degenerate
        points.append(full)
    pts = merge_solutions(model, points, cfg)
    good = [p for p in pts if p.nontrivial and p.residual_dual < 1e-8]
    classes = {p.sign_class for p in good}
    ok = (len(good) >= 3 and {"positive", "negative"} <= classes
          and morse_data(model, np.zeros(model.mesh.n)) == (0, 0))
    return ok, pts, degenerate


def test_criterion_07_three_solutions(acceptance, three_solution_setup):
    mesh, model, es = three_solution_setup
    t0 = time.perf_counter()
    outcomes, counts, degenerate = [], [], []
    for seed in range(10):
        ok, pts, deg = _three_solution_run(model, es, seed)
        if deg:
            degenerate.append(seed)
            continue
        outcomes.append(ok)
        counts.append(sorted(p.sign_class for p in pts if p.nontrivial))
    elapsed = time.perf_counter() - t0
    rate = sum(outcomes) / max(len(outcomes), 1)
    ok = rate >= 0.9 and elapsed < 300
    found = sorted({tuple(c) for c in counts})
    acceptance(7, "three nontrivial solutions", ok,
               f"success {sum(outcomes)}/{len(outcomes)} seeds, nontrivial sets {found}, "
               f"degenerate seeds {degenerate}, {elapsed:.0f} s")
    assert ok


def test_criterion_08_existence(acceptance):
    t0 = time.perf_counter()
    mesh = Mesh1D(-1.0, 1.0, 128, 0.5)
    ops = build_operators(mesh)
    es = solve_eigen(ops, 6)
    lam = es.lambdas
    model = EnergyModel(mesh, example_reaction(0.5 * (lam[0] + lam[1]), 2, lam), A=ops.A)
    pts = newton_multistart(model, 64, 0, SolverConfig(), eigset=es, k=2)
    nontrivial = [p for p in pts if p.nontrivial and p.residual_dual < 1e-8]
    zero = morse_data(model, np.zeros(mesh.n))
    elapsed = time.perf_counter() - t0
    ok = len(nontrivial) >= 1 and zero == (1, 0) and elapsed < 180
    acceptance(8, "existence of a nontrivial solution", ok,
               f"nontrivial {len(nontrivial)}, morse(0) {tuple(zero)}, {elapsed:.0f} s")
    assert ok


def test_criterion_09_linear_reduction(acceptance):
    mesh = Mesh1D(-1.0, 1.0, 128, 0.5)
    ops = build_operators(mesh)
    es = solve_eigen(ops, 6)
    lam = es.lambdas
    results = {}
    for k in (1, 2, 3):
        model = EnergyModel(mesh, linear_reaction(0.5 * (lam[k - 1] + lam[k])), A=ops.A)
        pts = newton_multistart(model, 64, 0, SolverConfig(), eigset=es, k=k)
        results[k] = ([p.sign_class for p in pts], tuple(morse_data(model, np.zeros(mesh.n))))
    ok = all(classes == ["zero"] and md == (k, 0) for k, (classes, md) in results.items())
    acceptance(9, "linear reaction reduction", ok,
               ", ".join(f"k={k}: {md}" for k, (_, md) in results.items()))
    assert ok


def test_criterion_10_determinism(acceptance, tmp_path):
    cfg = os.path.join(os.path.dirname(__file__), os.pardir, "configs", "three_solutions.cfg")
    digests = []
    for run in ("a", "b"):
        out = tmp_path / run
        assert main(["solve", "--config", cfg, "--out", str(out), "--seed", "0"]) == 0
        digests.append({name: hashlib.sha256((out / name).read_bytes()).hexdigest()
                        for name in sorted(os.listdir(out))})
    ok = digests[0] == digests[1] and len(digests[0]) > 1
    acceptance(10, "byte-identical reruns", ok, f"{len(digests[0])} files compared")
    assert ok
