"""Why the two example reactions have so few solutions on this mesh.

For a P1 solution ``u`` the reaction load equals ``M_q u`` with the secant
coefficient ``q = f(u) / u`` evaluated at the quadrature points. A nontrivial
solution ``A u = M_q u`` therefore makes 1 an eigenvalue of the pencil
``(A, M_q)``. The example reactions keep ``q`` between two consecutive
eigenvalues:

* with mu = lambda_1 / 2 we get ``lambda_1 <= q < lambda_2``, so 1 can only be
  the first pencil eigenvalue and every solution is one-signed;
* with mu halfway between lambda_1 and lambda_2 we get
  ``lambda_1 < q < lambda_2``, so 1 lies strictly inside the first gap and no
  nontrivial solution exists.

The script checks both statements on random states and on the computed
solutions.

Run with ``python3 demos/obstruction_demo.py``.
"""

import numpy as np
import scipy.linalg as sla

from fracmorse import (Mesh1D, build_operators, solve_eigen, example_reaction, EnergyModel,
                       SolverConfig, newton_multistart)


def secant_pencil(model, u):
    """First two eigenvalues of ``(A, M_q)`` at state ``u``."""
    lam, w, uq, xq = model.quadrature(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(uq != 0, model.reaction.f(xq, uq) / uq,
                     model.reaction.fprime(xq, np.zeros_like(uq)))
    Mq = model._tridiag(lam, w * q)
    return sla.eigh(model.A, Mq, eigvals_only=True, subset_by_index=[0, 1])


def main():
    mesh = Mesh1D(-1.0, 1.0, 128, 0.5)
    ops = build_operators(mesh)
    es = solve_eigen(ops, 6)
    lam = es.lambdas
    rng = np.random.default_rng(0)
    cases = {
        "mu = lambda_1 / 2": 0.5 * lam[0],
        "mu = (lambda_1 + lambda_2) / 2": 0.5 * (lam[0] + lam[1]),
    }
    for label, mu in cases.items():
        model = EnergyModel(mesh, example_reaction(mu, 2, lam), A=ops.A)
        print(label)
        lo1, hi1, lo2 = np.inf, -np.inf, np.inf
        for _ in range(200):
            u = rng.uniform(0.1, 30.0) * es.vectors[:, :6] @ rng.standard_normal(6)
            t1, t2 = secant_pencil(model, u)
            lo1, hi1, lo2 = min(lo1, t1), max(hi1, t1), min(lo2, t2)
        print(f"  200 random states: theta_1 in [{lo1:.4f}, {hi1:.4f}], min theta_2 = {lo2:.4f}")
        pts = newton_multistart(model, 64, 0, SolverConfig(), eigset=es, k=2)
        for p in pts:
            line = f"  solution {p.sign_class:9s} energy {p.energy:11.5f}"
            if p.nontrivial:
                t1, t2 = secant_pencil(model, p.u)
                line += f"   pencil eigenvalues {t1:.10f}, {t2:.4f}"
            print(line)
        print()


if __name__ == "__main__":
    main()
