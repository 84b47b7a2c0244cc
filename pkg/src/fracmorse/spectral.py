"""Weighted fractional eigenpairs ``A e = lambda M_eta e``.

Besides the dense generalized eigensolve this module provides checks of
the variational characterizations: the Rayleigh quotient, the inductive
constrained minimization over M_eta-orthogonal complements, the
Courant-Fischer sup-inf over k-dimensional subspaces, and monotonicity of
each eigenvalue in the weight.
"""

from dataclasses import dataclass, field
import os

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigh, subspace_angles
from scipy.optimize import brentq

from .assembly import assemble_mass, assemble_stiffness, OperatorPair
from .errors import NonConvergenceError, PreconditionError, SolverError
from . import io as _io

__all__ = [
    "EigenSet",
    "SpectrumReport",
    "solve_eigen",
    "rayleigh_quotient",
    "deflated_minimize",
    "courant_fischer_check",
    "monotonicity_check",
    "spectrum_report",
    "sign_class",
    "eigen_clusters",
    "eigenspace_angle",
    "richardson_limit",
    "export_spectrum",
    "EIGEN_RESIDUAL_TOL",
    "CLUSTER_RTOL",
]

EIGEN_RESIDUAL_TOL = 1e-9
CLUSTER_RTOL = 1e-8


@dataclass(frozen=True)
class EigenSet:
    """Leading eigenpairs in ascending order.

    Columns of ``vectors`` are M_eta-orthonormal; the entry of largest
    magnitude in each column is positive.
    """

    lambdas: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    eta_ref: str = "unit"

    @property
    def k_max(self):
        return self.lambdas.size

    def __len__(self):
        return self.lambdas.size


@dataclass
class SpectrumReport:
    gap_1_2: float
    sign_class_per_mode: list
    monotonicity_records: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    strict_modes: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.violations

    def to_dict(self):
        return {
            "gap_1_2": self.gap_1_2,
            "sign_class_per_mode": list(self.sign_class_per_mode),
            "monotonicity_records": [dict(r) for r in self.monotonicity_records],
            "violations": list(self.violations),
            "strict_modes": list(self.strict_modes),
            "passed": self.passed,
        }


def sign_class(v, tol=1e-10):
    """``"one-signed"`` if every entry shares a strict sign, else ``"nodal"``."""
    v = np.asarray(v)
    scale = max(np.max(np.abs(v)), np.finfo(float).tiny)
    if np.all(v > tol * scale) or np.all(v < -tol * scale):
        return "one-signed"
    return "nodal"


def _fix_signs(V):
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def solve_eigen(ops, k_max):
    """First ``k_max`` eigenpairs of ``A e = lambda M_eta e``.

    Raises
    ------
    PreconditionError
        If ``k_max`` is outside ``1..n``.
    SolverError
        If LAPACK fails or a residual exceeds ``1e-9 ||A||``.
    """
    n = ops.n
    k_max = int(k_max)
    if not 1 <= k_max <= n:
        raise PreconditionError(f"k_max must lie in 1..{n}, got {k_max}")
    try:
        lam, V = eigh(ops.A, ops.M_eta, subset_by_index=[0, k_max - 1])
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"generalized eigensolve failed: {exc}",
                          {"n": n, "k_max": k_max}) from exc
    # eigh returns M_eta-orthonormal columns; renormalize defensively
    norms = np.sqrt(np.einsum("ik,ij,jk->k", V, ops.M_eta, V))
    V = _fix_signs(V / norms)
    R = ops.A @ V - (ops.M_eta @ V) * lam
    res = np.linalg.norm(R, axis=0)
    scale = np.linalg.norm(ops.A, 2)
    if np.any(res > EIGEN_RESIDUAL_TOL * scale):
        k = int(np.argmax(res))
        raise SolverError(f"eigen residual {res[k]:.3e} for mode {k + 1} exceeds tolerance",
                          {"residuals": res.tolist(), "scale": scale})
    label = ops.eta.label if ops.eta is not None else "unit"
    lam = np.array(lam)
    for arr in (lam, V, res):
        arr.setflags(write=False)
    return EigenSet(lam, V, res, eta_ref=label)


def rayleigh_quotient(ops, u):
    """``u^T A u / u^T M_eta u``."""
    u = np.asarray(u, dtype=float)
    if not np.any(u):
        raise PreconditionError("Rayleigh quotient of the zero vector")
    return float(u @ ops.A @ u) / float(u @ ops.M_eta @ u)


def eigen_clusters(lambdas, rtol=CLUSTER_RTOL):
    """Group indices of ``lambdas`` whose relative gap is below ``rtol``."""
    groups = [[0]]
    for k in range(1, len(lambdas)):
        if abs(lambdas[k] - lambdas[k - 1]) <= rtol * abs(lambdas[k]):
            groups[-1].append(k)
        else:
            groups.append([k])
    return groups


def eigenspace_angle(U, V):
    """Largest principal angle between the column spans of ``U`` and ``V``."""
    U = np.atleast_2d(np.asarray(U, dtype=float).T).T
    V = np.atleast_2d(np.asarray(V, dtype=float).T).T
    return float(np.max(subspace_angles(U, V)))


def deflated_minimize(ops, k, restarts=5, seed=0, eigset=None, rtol=1e-12,
                      max_iter=20000):
    """Minimize the Rayleigh quotient on the complement of ``e_1..e_{k-1}``.

    Steepest descent in the M_eta geometry with an exact line search (a
    Rayleigh-Ritz step on ``span{u, g}``); the search direction is projected
    onto the M_eta-orthogonal complement of the previously computed
    eigenvectors.

    Returns
    -------
    lam : float
    vec : ndarray
        M_eta-normalized minimizer.
    """
    n = ops.n
    k = int(k)
    if not 1 <= k <= n:
        raise PreconditionError(f"k must lie in 1..{n}, got {k}")
    if k > 1 and (eigset is None or eigset.k_max < k - 1):
        eigset = solve_eigen(ops, k - 1)
    E = eigset.vectors[:, :k - 1] if k > 1 else np.zeros((n, 0))
    ME = ops.M_eta @ E
    M_fac = cho_factor(ops.M_eta)
    rng = np.random.default_rng(seed)

    def project(v):
        return v - E @ (ME.T @ v)

    last = None
    for attempt in range(int(restarts)):
        u = project(rng.standard_normal(n))
        u /= np.sqrt(u @ ops.M_eta @ u)
        for it in range(max_iter):
            Au = ops.A @ u
            rho = float(u @ Au)
            g = project(cho_solve(M_fac, Au - rho * (ops.M_eta @ u)))
            gnorm = np.sqrt(max(g @ ops.M_eta @ g, 0.0))
            last = gnorm / rho
            if last <= rtol:
                return rho, u
            S = np.column_stack((u, g / gnorm))
            theta, Y = eigh(S.T @ ops.A @ S, S.T @ ops.M_eta @ S)
            u = project(S @ Y[:, 0])
            u /= np.sqrt(u @ ops.M_eta @ u)
    raise NonConvergenceError(
        f"deflated minimization for mode {k} did not reach stationarity",
        last_residual=last, diagnostics={"restarts": restarts, "max_iter": max_iter})


def courant_fischer_check(ops, k, trials=100, seed=0, eigset=None, tol=1e-10,
                          attain_tol=1e-8):
    """Sample the sup-inf characterization of ``1 / lambda_k``.

    For each random k-dimensional subspace ``F`` the quantity
    ``inf {u^T M_eta u : u in F, u^T A u = 1}`` is the reciprocal of the
    largest Ritz value of the pencil restricted to ``F``; it never exceeds
    ``1 / lambda_k``, and the span of the first ``k`` eigenvectors attains it.
    """
    n = ops.n
    k = int(k)
    if not 1 <= k <= n:
        raise PreconditionError(f"k must lie in 1..{n}, got {k}")
    if eigset is None or eigset.k_max < k:
        eigset = solve_eigen(ops, k)
    target = 1.0 / eigset.lambdas[k - 1]

    def sup_inf(Q):
        Q, _ = np.linalg.qr(Q)
        ritz = eigh(Q.T @ ops.A @ Q, Q.T @ ops.M_eta @ Q, eigvals_only=True)
        return 1.0 / ritz[-1]

    rng = np.random.default_rng(seed)
    values = np.array([sup_inf(rng.standard_normal((n, k))) for _ in range(int(trials))])
    attained = sup_inf(eigset.vectors[:, :k])
    excess = float(np.max(values - target)) if values.size else -np.inf
    attain_err = abs(attained - target)
    return {
        "k": k,
        "trials": int(trials),
        "seed": int(seed),
        "target": target,
        "max_sampled": float(values.max()) if values.size else None,
        "max_excess": excess,
        "attained": attained,
        "attain_error": attain_err,
        "tol": tol,
        "attain_tol": attain_tol,
        "passed": bool(excess <= tol and attain_err <= attain_tol),
    }


def spectrum_report(eigset):
    lam = eigset.lambdas
    gap = float(lam[1] - lam[0]) if lam.size > 1 else float("nan")
    classes = [sign_class(eigset.vectors[:, j]) for j in range(lam.size)]
    return SpectrumReport(gap, classes)


def monotonicity_check(mesh, eta1, eta2, k_max, A=None, tol=1e-10,
                       strict_threshold=1e-12):
    """Compare ``lambda_k(eta1)`` and ``lambda_k(eta2)`` for ``eta2 >= eta1``.

    The inequality ``lambda_k(eta1) >= lambda_k(eta2) - tol * lambda_k(eta1)``
    is required for every ``k``; modes where the relative margin exceeds
    ``strict_threshold`` are listed in ``strict_modes``.
    """
    v1 = np.asarray(eta1.values)
    v2 = np.asarray(eta2.values)
    if v1.shape != v2.shape:
        raise PreconditionError("weights have different lengths")
    if np.any(v2 < v1):
        raise PreconditionError("monotonicity check needs eta2 >= eta1 at every node")
    if np.array_equal(v1, v2):
        raise PreconditionError("monotonicity check needs eta1 != eta2")
    if A is None:
        A = assemble_stiffness(mesh)
    M = assemble_mass(mesh)
    es1 = solve_eigen(OperatorPair(A, M, assemble_mass(mesh, eta1), mesh, eta1), k_max)
    es2 = solve_eigen(OperatorPair(A, M, assemble_mass(mesh, eta2), mesh, eta2), k_max)
    report = spectrum_report(es1)
    for k in range(int(k_max)):
        l1, l2 = float(es1.lambdas[k]), float(es2.lambdas[k])
        margin = (l1 - l2) / l1
        report.monotonicity_records.append({
            "eta1": eta1.label, "eta2": eta2.label, "k": k + 1,
            "lambda_eta1": l1, "lambda_eta2": l2, "relative_margin": margin,
        })
        if margin < -tol:
            report.violations.append(k + 1)
        elif margin > strict_threshold:
            report.strict_modes.append(k + 1)
    return report


def richardson_limit(hs, values):
    """Extrapolate ``values ~ L + C h^p`` from three mesh sizes.

    Returns ``(L, p)``; the exponent is found by root bracketing so that
    unequal refinement ratios are handled.
    """
    h = np.asarray(hs, dtype=float)
    v = np.asarray(values, dtype=float)
    if h.size != 3:
        raise PreconditionError("Richardson extrapolation needs exactly three levels")
    order = np.argsort(-h)
    h, v = h[order], v[order]
    target = (v[0] - v[1]) / (v[1] - v[2])

    def ratio(p):
        return (h[0] ** p - h[1] ** p) / (h[1] ** p - h[2] ** p) - target

    p = brentq(ratio, 0.05, 8.0)
    C = (v[0] - v[1]) / (h[0] ** p - h[1] ** p)
    return float(v[2] - C * h[2] ** p), float(p)


def export_spectrum(mesh, eigset, out_dir, prefix="spectrum"):
    """Write eigenvalue and eigenvector CSVs; return the file entries."""
    files = []
    name = f"{prefix}.csv"
    chk = _io.write_csv(os.path.join(out_dir, name), ["k", "lambda", "residual"],
                        ((k + 1, lam, r) for k, (lam, r)
                         in enumerate(zip(eigset.lambdas, eigset.residuals))))
    files.append(_io.file_entry(name, chk))
    x = mesh.nodes
    for k in range(eigset.k_max):
        name = f"{prefix}_mode{k + 1:03d}.csv"
        chk = _io.write_csv(os.path.join(out_dir, name), ["node_index", "x", "value"],
                            zip(range(1, mesh.n + 1), x, eigset.vectors[:, k]))
        files.append(_io.file_entry(name, chk))
    return files
