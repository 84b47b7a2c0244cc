"""Critical points of a sublinear semilinear energy on (-1, 1), s = 1/2.

The reaction is the two-sided example with mu = lambda_1 / 2 and k = 2.
The script

1. runs Newton from many seeded starts and lists the distinct solutions;
2. finds the positive and negative solutions a second way, as mountain-pass
   points of the one-sided truncated energies;
3. prints the Morse index and nullity of each solution.

Run with ``python3 demos/critical_points_demo.py``.
"""

from fracmorse import (Mesh1D, build_operators, solve_eigen, example_reaction, EnergyModel,
                       SolverConfig, newton_multistart, mountain_pass, classify)
from fracmorse.variational import ramp_endpoint


def describe(p):
    return (f"{p.provenance:18s} {p.sign_class:9s} energy {p.energy:12.6f}"
            f"   morse {p.morse_index} nullity {p.nullity}   residual {p.residual_dual:.1e}")


def main():
    mesh = Mesh1D(-1.0, 1.0, 128, 0.5)
    ops = build_operators(mesh)
    es = solve_eigen(ops, 6)
    model = EnergyModel(mesh, example_reaction(0.5 * es.lambdas[0], 2, es.lambdas), A=ops.A)
    cfg = SolverConfig(seed=0)

    print("Newton multistart, 64 starts")
    for p in newton_multistart(model, 64, 0, cfg, eigset=es, k=2):
        print("  " + describe(p))

    print("\nmountain pass on the truncated energies")
    for sign in (1, -1):
        trunc = model.truncated(sign)
        cp = mountain_pass(trunc, ramp_endpoint(trunc, sign * es.vectors[:, 0]), cfg)
        print("  " + describe(classify(model, cp.u, "mountain_pass", cfg)))


if __name__ == "__main__":
    main()
