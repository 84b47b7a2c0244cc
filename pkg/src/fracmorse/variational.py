"""Discrete energy functional and critical-point search.

The energy of a nodal vector ``u`` is

    phi(u) = 1/2 u^T A u - Q[F(x, u_h(x))],

where ``u_h`` is the piecewise-linear interpolant and ``Q`` a 4-point
Gauss rule on every cell. Cells are split where ``u_h`` crosses a kink of
the reaction, so ``Q`` only sees smooth integrands. Gradient and Hessian
use the same rule.

Critical points are located by descent (:func:`minimize`), by a
path-deformation minimax (:func:`mountain_pass`) and by damped Newton from
many starts (:func:`newton_multistart`); :func:`morse_data` reads off the
Morse index and nullity from the inertia of the Hessian.
"""

from dataclasses import dataclass, field, asdict
import logging
import os
import warnings

import numpy as np
from scipy.linalg import LinAlgError, LinAlgWarning, cho_factor, cho_solve, eigh, ldl, solve

from .assembly import assemble_mass, assemble_stiffness
from .errors import GeometryError, NonConvergenceError, PreconditionError
from .reaction import TruncatedReaction, truncate
from . import io as _io

__all__ = [
    "SolverConfig",
    "EnergyModel",
    "CriticalPoint",
    "MorseData",
    "energy",
    "gradient",
    "hessian",
    "minimize",
    "mountain_pass",
    "newton_multistart",
    "newton_solve",
    "morse_data",
    "classify",
    "ring_level",
    "ramp_endpoint",
    "merge_solutions",
    "export_solutions",
    "gradient_check",
    "hessian_check",
]

log = logging.getLogger(__name__)

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(6)


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and budgets shared by the critical-point solvers.

    ``tol`` bounds the Euclidean norm of the gradient vector.
    """

    tol: float = 1e-10
    max_iter: int = 200
    seed: int = 0
    n_starts: int = 64
    kernel_tol: float = 1e-6
    dedup_rtol: float = 1e-4
    zero_tol: float = 1e-8
    newton_halvings: int = 30
    tikhonov: float = 1e-8
    magnitudes: tuple = (0.1, 1.0, 10.0)
    mp_nodes: int = 41
    mp_max_iter: int = 3000
    mp_step: float = 0.3
    mp_polish: float = 1e-4
    mp_ring_samples: int = 200
    mp_ring_radius: float = None
    blowup: float = 1e8

    def to_dict(self):
        return asdict(self)


class EnergyModel:
    """Energy ``phi`` for a reaction on a mesh.

    Parameters
    ----------
    mesh : Mesh1D
    reaction : Reaction or TruncatedReaction
    A : ndarray, optional
        Stiffness matrix; assembled when omitted.
    """

    def __init__(self, mesh, reaction, A=None):
        self.mesh = mesh
        self.reaction = reaction
        self.A = assemble_stiffness(mesh) if A is None else np.asarray(A)
        self.kinks = np.asarray(getattr(reaction, "kinks", ()), dtype=float)
        self._A_fac = cho_factor(self.A)
        self._scale = None
        self._M_quad = None

    # -- quadrature ---------------------------------------------------------

    def quadrature(self, u):
        """Gauss points on every cell, split where ``u_h`` crosses a kink.

        Returns ``(lam, w, uq, xq)`` of shape ``(n + 1, P)``: local barycentric
        coordinate, weight, interpolant value and abscissa. Cell ``j`` joins
        nodes ``j - 1`` and ``j`` (0-based, with zero boundary values).
        """
        q = self._split(u)
        return q["lam"], q["w"], q["uq"], q["xq"]

    def _split(self, u):
        mesh = self.mesh
        U = np.concatenate(([0.0], np.asarray(u, dtype=float), [0.0]))
        ul, ur = U[:-1], U[1:]
        nc = ul.size
        if self.kinks.size:
            du = (ur - ul)[:, None]
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                cut = (self.kinks[None, :] - ul[:, None]) / du
            # unused breakpoints park at 1 and produce empty pieces
            cut = np.where((du != 0) & (cut > 0) & (cut < 1), cut, 1.0)
            cut.sort(axis=1)
        else:
            cut = np.ones((nc, 0))
        bp = np.hstack((np.zeros((nc, 1)), cut, np.ones((nc, 1))))
        lo, width = bp[:, :-1], np.diff(bp, axis=1)
        loc = 0.5 * (_GAUSS_X + 1.0)
        lam3 = lo[:, :, None] + width[:, :, None] * loc
        w3 = 0.5 * mesh.h * width[:, :, None] * _GAUSS_W
        uq3 = ul[:, None, None] * (1.0 - lam3) + ur[:, None, None] * lam3
        return {
            "ul": ul, "ur": ur, "cut": cut, "width": width, "loc": loc,
            "lam": lam3.reshape(nc, -1), "w": w3.reshape(nc, -1),
            "uq": uq3.reshape(nc, -1),
            "xq": mesh.a + mesh.h * (np.arange(nc)[:, None] + lam3.reshape(nc, -1)),
        }

    def _breakpoint_terms(self, q, Fq, fq):
        """Derivative of the split rule with respect to moving breakpoints.

        For an exact integral the two pieces meeting at a breakpoint cancel;
        the rule leaves a small remainder, which is propagated to the cell's
        two nodes so that the gradient is the exact derivative of ``energy``.
        """
        nc, K = q["cut"].shape
        if K == 0:
            return np.zeros(nc), np.zeros(nc)
        G = q["loc"].size
        Fq = Fq.reshape(nc, K + 1, G)
        fq = fq.reshape(nc, K + 1, G)
        slope = (q["ur"] - q["ul"])[:, None, None]
        hw = 0.5 * self.mesh.h * _GAUSS_W
        width = q["width"][:, :, None]
        d_right = np.sum(hw * (Fq + width * fq * slope * q["loc"]), axis=2)
        d_left = np.sum(hw * (-Fq + width * fq * slope * (1.0 - q["loc"])), axis=2)
        R = d_right[:, :-1] + d_left[:, 1:]
        beta = q["cut"]
        active = beta < 1.0
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            inv = np.where(active, 1.0 / (q["ur"] - q["ul"])[:, None], 0.0)
        d_ul = np.sum(np.where(active, -R * (1.0 - beta) * inv, 0.0), axis=1)
        d_ur = np.sum(np.where(active, -R * beta * inv, 0.0), axis=1)
        return d_ul, d_ur

    def _load(self, lam, wf):
        # sum_q wf * phi_i over cells, as a nodal vector
        n = self.mesh.n
        left = np.sum(wf * (1.0 - lam), axis=1)
        right = np.sum(wf * lam, axis=1)
        return right[:n] + left[1:]

    def _tridiag(self, lam, wd):
        n = self.mesh.n
        ll = np.sum(wd * (1.0 - lam) ** 2, axis=1)
        rr = np.sum(wd * lam ** 2, axis=1)
        lr = np.sum(wd * lam * (1.0 - lam), axis=1)
        C = np.diag(rr[:n] + ll[1:])
        off = lr[1:n]
        C += np.diag(off, 1) + np.diag(off, -1)
        return C

    @property
    def M_quad(self):
        """Mass matrix of the reaction quadrature (weight one)."""
        if self._M_quad is None:
            lam, w, _, _ = self.quadrature(np.zeros(self.mesh.n))
            self._M_quad = self._tridiag(lam, w)
        return self._M_quad

    # -- basic functionals ------------------------------------------------

    def energy(self, u):
        u = np.asarray(u, dtype=float)
        _, w, uq, xq = self.quadrature(u)
        return 0.5 * float(u @ self.A @ u) - float(np.sum(w * self.reaction.F(xq, uq)))

    def gradient(self, u):
        u = np.asarray(u, dtype=float)
        q = self._split(u)
        fq = self.reaction.f(q["xq"], q["uq"])
        load = self._load(q["lam"], q["w"] * fq)
        if q["cut"].shape[1]:
            d_ul, d_ur = self._breakpoint_terms(q, self.reaction.F(q["xq"], q["uq"]), fq)
            n = self.mesh.n
            load = load + d_ur[:n] + d_ul[1:]
        return self.A @ u - load

    def hessian(self, u):
        u = np.asarray(u, dtype=float)
        lam, w, uq, xq = self.quadrature(u)
        return self.A - self._tridiag(lam, w * self.reaction.fprime(xq, uq))

    # -- norms ------------------------------------------------------------

    def a_norm(self, u):
        u = np.asarray(u, dtype=float)
        return float(np.sqrt(max(u @ self.A @ u, 0.0)))

    def riesz(self, g):
        """``A^{-1} g``: the gradient as an element of the energy space."""
        return cho_solve(self._A_fac, g)

    def dual_norm(self, g):
        g = np.asarray(g, dtype=float)
        return float(np.sqrt(max(g @ self.riesz(g), 0.0)))

    @property
    def scale(self):
        """Spectral norm of ``A``."""
        if self._scale is None:
            self._scale = float(np.linalg.norm(self.A, 2))
        return self._scale

    def truncated(self, sign):
        base = self.reaction.base if isinstance(self.reaction, TruncatedReaction) else self.reaction
        return EnergyModel(self.mesh, truncate(base, sign), A=self.A)

    def untruncated(self):
        if isinstance(self.reaction, TruncatedReaction):
            return EnergyModel(self.mesh, self.reaction.base, A=self.A)
        return self


def energy(model, u):
    """``phi(u)``; raises NumericalDomainError on non-finite reaction values."""
    return model.energy(u)


def gradient(model, u):
    return model.gradient(u)


def hessian(model, u):
    return model.hessian(u)


def gradient_check(model, probes=20, seed=0, eps=1e-5, rtol=1e-6, amplitude=1.0):
    """Central differences of ``phi`` against ``phi'(u) v`` on random pairs.

    The relative error of each probe is measured against
    ``max(|g.v|, |phi|-level)`` so that near-zero directional derivatives
    do not dominate; returns ``{"passed", "worst", "errors"}``.
    """
    rng = np.random.default_rng(seed)
    n = model.mesh.n
    errors = []
    for _ in range(probes):
        u = amplitude * rng.standard_normal(n)
        v = rng.standard_normal(n)
        fd = (model.energy(u + eps * v) - model.energy(u - eps * v)) / (2 * eps)
        an = float(model.gradient(u) @ v)
        ref = max(abs(an), abs(fd))
        errors.append(abs(fd - an) / ref if ref > 0 else 0.0)
    worst = float(max(errors))
    return {"passed": worst < rtol, "worst": worst, "errors": errors}


def hessian_check(model, probes=20, seed=0, eps=1e-5, rtol=1e-5, amplitude=1.0):
    """Central differences of ``phi'`` against Hessian-vector products."""
    rng = np.random.default_rng(seed)
    n = model.mesh.n
    errors = []
    for _ in range(probes):
        u = amplitude * rng.standard_normal(n)
        v = rng.standard_normal(n)
        fd = (model.gradient(u + eps * v) - model.gradient(u - eps * v)) / (2 * eps)
        an = model.hessian(u) @ v
        ref = np.linalg.norm(an)
        errors.append(float(np.linalg.norm(fd - an) / ref) if ref > 0 else 0.0)
    worst = float(max(errors))
    return {"passed": worst < rtol, "worst": worst, "errors": errors}


# -- classification ---------------------------------------------------------

class MorseData(tuple):
    """``(morse_index, nullity)`` with an optional degeneracy warning."""

    def __new__(cls, morse_index, nullity, warning=None, thetas=None):
        obj = super().__new__(cls, (int(morse_index), int(nullity)))
        obj.warning = warning
        obj.thetas = thetas
        return obj

    @property
    def morse_index(self):
        return self[0]

    @property
    def nullity(self):
        return self[1]


def _negative_count(S):
    # Sylvester inertia from a symmetric indefinite factorization
    _, D, _ = ldl(S, lower=True)
    return int(np.sum(np.linalg.eigvalsh(D) < 0))


def morse_data(model, u, kernel_tol=1e-6):
    """Morse index and nullity of ``phi''(u)``.

    Eigenvalues are measured relative to the energy inner product, i.e. as
    the generalized eigenvalues ``theta`` of ``H v = theta A v``; the index
    counts ``theta < -kernel_tol`` and the nullity ``|theta| <= kernel_tol``.
    Both counts come from inertia of ``H -/+ kernel_tol A``; if inertia at
    ``kernel_tol / 10`` and ``10 kernel_tol`` disagrees an eigensolve is used
    and a warning is attached.
    """
    H = model.hessian(u)
    A = model.A

    def counts(tol):
        below = _negative_count(H + tol * A)
        upto = _negative_count(H - tol * A)
        return below, upto - below

    m, nu = counts(kernel_tol)
    lo = counts(kernel_tol / 10.0)
    hi = counts(kernel_tol * 10.0)
    warning = None
    thetas = None
    if lo != (m, nu) or hi != (m, nu):
        thetas = eigh(H, A, eigvals_only=True)
        m = int(np.sum(thetas < -kernel_tol))
        nu = int(np.sum(np.abs(thetas) <= kernel_tol))
        near = thetas[(np.abs(thetas) > kernel_tol / 10.0) & (np.abs(thetas) < 10.0 * kernel_tol)]
        warning = (f"eigenvalue cluster near the kernel threshold {kernel_tol:g}: "
                   f"{near.tolist()}")
    return MorseData(m, nu, warning, thetas)


@dataclass
class CriticalPoint:
    u: np.ndarray
    energy: float
    residual: float
    residual_dual: float
    morse_index: int
    nullity: int
    sign_class: str
    provenance: str
    warning: str = None
    iterations: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def nontrivial(self):
        return self.sign_class != "zero"

    def manifest(self):
        return {
            "energy": self.energy,
            "residual_euclid": self.residual,
            "residual_dual": self.residual_dual,
            "morse_index": self.morse_index,
            "nullity": self.nullity,
            "sign_class": self.sign_class,
            "provenance": self.provenance,
            "warning": self.warning,
        }


def _sign_class(u, zero_tol=1e-10):
    u = np.asarray(u)
    if np.all(np.abs(u) <= zero_tol):
        return "zero"
    if np.all(u > zero_tol):
        return "positive"
    if np.all(u < -zero_tol):
        return "negative"
    return "mixed"


def classify(model, u, provenance, cfg=None, iterations=0):
    """Build a :class:`CriticalPoint` for ``u`` (always with respect to ``model``)."""
    cfg = cfg or SolverConfig()
    u = np.array(u, dtype=float)
    if model.a_norm(u) <= cfg.zero_tol:
        u = np.zeros_like(u)
    g = model.gradient(u)
    md = morse_data(model, u, cfg.kernel_tol)
    return CriticalPoint(
        u=u, energy=model.energy(u), residual=float(np.linalg.norm(g)),
        residual_dual=model.dual_norm(g), morse_index=md.morse_index,
        nullity=md.nullity, sign_class=_sign_class(u), provenance=provenance,
        warning=md.warning, iterations=iterations)


# -- descent ----------------------------------------------------------------

def minimize(model, u0, cfg=None):
    """Descent to a critical point.

    Newton steps are taken while the Hessian is positive definite; otherwise
    the step is the negative Riesz gradient ``-A^{-1} phi'(u)``. Both are
    globalized by Armijo backtracking.

    Raises
    ------
    NonConvergenceError
        Budget exhausted, or the energy decreases without bound.
    """
    cfg = cfg or SolverConfig()
    u = np.array(u0, dtype=float)
    if u.shape != (model.mesh.n,):
        raise PreconditionError(f"start vector must have length {model.mesh.n}")
    E = model.energy(u)
    res = np.inf
    for it in range(cfg.max_iter * 10):
        g = model.gradient(u)
        res = float(np.linalg.norm(g))
        if res <= cfg.tol:
            return classify(model, u, "minimizer", cfg, iterations=it)
        try:
            d = -cho_solve(cho_factor(model.hessian(u)), g)
        except LinAlgError:
            d = -model.riesz(g)
        slope = float(g @ d)
        if slope >= 0:
            d = -model.riesz(g)
            slope = float(g @ d)
        t = 1.0
        for _ in range(60):
            E_new = model.energy(u + t * d)
            if E_new <= E + 1e-4 * t * slope:
                break
            t *= 0.5
        else:
            # no decrease possible at rounding level: accept if already tiny
            raise NonConvergenceError("line search failed", last_residual=res,
                                      diagnostics={"iteration": it})
        u = u + t * d
        E = E_new
        if model.a_norm(u) > cfg.blowup:
            raise NonConvergenceError("energy unbounded below along the descent path",
                                      last_residual=res,
                                      diagnostics={"iteration": it, "energy": E})
    raise NonConvergenceError("descent budget exhausted", last_residual=res,
                              diagnostics={"iterations": cfg.max_iter * 10})


# -- Newton -----------------------------------------------------------------

def newton_solve(model, u0, cfg=None):
    """Damped Newton on ``phi'(u) = 0``.

    Returns ``(u, residual, iterations)``; ``u`` is ``None`` when the run
    stalls, blows up or exhausts the budget.
    """
    cfg = cfg or SolverConfig()
    u = np.array(u0, dtype=float)
    g = model.gradient(u)
    res = float(np.linalg.norm(g))
    for it in range(cfg.max_iter):
        if res <= cfg.tol:
            return u, res, it
        H = model.hessian(u)
        with warnings.catch_warnings():
            warnings.simplefilter("error", LinAlgWarning)
            try:
                d = -solve(H, g, assume_a="sym")
            except (LinAlgError, LinAlgWarning):
                d = -solve(H + cfg.tikhonov * model.scale * np.eye(H.shape[0]), g,
                           assume_a="sym")
        t = 1.0
        for _ in range(cfg.newton_halvings):
            trial = u + t * d
            g_new = model.gradient(trial)
            r_new = float(np.linalg.norm(g_new))
            if r_new < res:
                break
            t *= 0.5
        else:
            return None, res, it
        u, g, res = trial, g_new, r_new
        if not np.all(np.isfinite(u)) or model.a_norm(u) > cfg.blowup:
            return None, res, it
    if res <= cfg.tol:
        return u, res, cfg.max_iter
    return None, res, cfg.max_iter


def merge_solutions(model, points, cfg=None):
    """Deduplicate critical points by relative distance in the energy norm.

    The first occurrence of each point is kept; the result is ordered by
    energy, then by the first nodal value, so that it does not depend on the
    order of the input.
    """
    cfg = cfg or SolverConfig()
    kept = []
    for p in points:
        dup = False
        for q in kept:
            scale = max(model.a_norm(p.u), model.a_norm(q.u))
            if scale <= cfg.zero_tol or model.a_norm(p.u - q.u) <= cfg.dedup_rtol * scale:
                dup = True
                break
        if not dup:
            kept.append(p)
    kept.sort(key=lambda p: (round(p.energy, 8), round(float(p.u @ np.arange(1, p.u.size + 1)), 6)))
    return kept


def newton_multistart(model, n_starts=None, seed=None, cfg=None, eigset=None, k=None):
    """Damped Newton from random starts in ``span{e_1, ..., e_{k+1}}``.

    Start coefficients are Gaussian; each start is rescaled so that its
    energy norm is one of ``cfg.magnitudes`` times ``||e_1||_A`` (cycled).
    Converged points are classified and deduplicated; an empty list is a
    legal outcome.
    """
    cfg = cfg or SolverConfig()
    n_starts = cfg.n_starts if n_starts is None else int(n_starts)
    seed = cfg.seed if seed is None else int(seed)
    target = model.untruncated()
    if k is None:
        k = int(target.reaction.meta.get("k", 2))
    if eigset is None or eigset.k_max < k + 1:
        from .assembly import build_operators
        from .spectral import solve_eigen
        eigset = solve_eigen(build_operators(model.mesh, A=model.A), min(k + 1, model.mesh.n))
    E = eigset.vectors[:, :k + 1]
    e1_norm = model.a_norm(E[:, 0])
    rng = np.random.default_rng(seed)
    found = []
    for i in range(n_starts):
        coef = rng.standard_normal(E.shape[1])
        u0 = E @ coef
        mag = cfg.magnitudes[i % len(cfg.magnitudes)] * e1_norm
        u0 *= mag / model.a_norm(u0)
        u, res, its = newton_solve(target, u0, cfg)
        if u is None:
            continue
        cp = classify(target, u, "newton", cfg, iterations=its)
        cp.extra["start"] = i
        found.append(cp)
    return merge_solutions(target, found, cfg)


# -- mountain pass ----------------------------------------------------------

def ring_level(model, radius, samples=200, seed=0, directions=None):
    """Sampled minimum of ``phi`` on the sphere ``||u||_A = radius``."""
    rng = np.random.default_rng(seed)
    n = model.mesh.n
    dirs = [] if directions is None else [np.asarray(d, dtype=float) for d in directions.T]
    dirs += [d * -1.0 for d in dirs]
    dirs += [rng.standard_normal(n) for _ in range(samples)]
    dirs += [np.abs(rng.standard_normal(n)) for _ in range(samples // 4)]
    dirs += [-np.abs(rng.standard_normal(n)) for _ in range(samples // 4)]
    vals = [model.energy(radius * d / model.a_norm(d)) for d in dirs]
    return float(min(vals))


def ramp_endpoint(model, direction, tau0=1.0, factor=2.0, max_steps=60):
    """Smallest ``tau = tau0 * factor^j`` with ``phi(tau * direction) < 0``."""
    tau = tau0
    for _ in range(max_steps):
        if model.energy(tau * direction) < 0:
            return tau * np.asarray(direction, dtype=float)
        tau *= factor
    raise GeometryError("energy stays non-negative along the ramp direction",
                        {"tau": tau})


def _reparametrize(model, path):
    # equal energy-norm spacing along the polyline, endpoints fixed
    seg = np.array([model.a_norm(path[i + 1] - path[i]) for i in range(len(path) - 1)])
    cum = np.concatenate(([0.0], np.cumsum(seg)))
    if cum[-1] == 0:
        return path
    targets = np.linspace(0.0, cum[-1], len(path))
    out = np.empty_like(path)
    out[0], out[-1] = path[0], path[-1]
    j = 0
    for i in range(1, len(path) - 1):
        while cum[j + 1] < targets[i]:
            j += 1
        w = (targets[i] - cum[j]) / seg[j] if seg[j] > 0 else 0.0
        out[i] = (1.0 - w) * path[j] + w * path[j + 1]
    return out


def mountain_pass(model, endpoint, cfg=None, ring_radius=None):
    """Path-deformation minimax between ``0`` and ``endpoint``.

    A polygonal path with ``cfg.mp_nodes`` nodes joins ``0`` to ``endpoint``
    (which must satisfy ``phi(endpoint) < 0``). Each sweep moves the interior
    nodes along the Riesz gradient with its tangential part removed, while
    the highest node climbs along the tangent and descends transversally;
    the path is then re-spaced in the energy norm. Once the highest node's
    dual residual falls below ``cfg.mp_polish`` it is refined by Newton.

    Raises
    ------
    GeometryError
        No mountain-pass geometry (``phi(endpoint) >= 0`` or the sampled
        ring level does not separate the endpoints), or the path maximum
        drifts to an endpoint.
    NonConvergenceError
        Sweep budget exhausted.
    """
    cfg = cfg or SolverConfig()
    end = np.asarray(endpoint, dtype=float)
    E_end = model.energy(end)
    if not E_end < 0:
        raise GeometryError(f"endpoint energy {E_end:.3e} is not negative")
    radius = ring_radius or cfg.mp_ring_radius or 0.05 * model.a_norm(end)
    m_r = ring_level(model, radius, cfg.mp_ring_samples, cfg.seed, directions=end[:, None])
    if not m_r > max(0.0, E_end):
        raise GeometryError(f"sampled ring level {m_r:.3e} does not exceed the endpoint levels",
                            {"radius": radius})
    N = cfg.mp_nodes
    path = np.linspace(0.0, 1.0, N)[:, None] * end[None, :]
    floor = max(0.0, E_end)
    step = cfg.mp_step
    res = np.inf
    for sweep in range(cfg.mp_max_iter):
        energies = np.array([model.energy(p) for p in path])
        imax = int(np.argmax(energies))
        if imax == 0 or imax == N - 1:
            raise GeometryError("path maximum collapsed onto an endpoint",
                                {"sweep": sweep, "index": imax})
        new = path.copy()
        for i in range(1, N - 1):
            if energies[i] <= floor and i != imax:
                # below both endpoint levels the path is irrelevant to the minimax
                continue
            d = model.riesz(model.gradient(path[i]))
            tang = path[i + 1] - path[i - 1]
            tang /= model.a_norm(tang)
            along = float(tang @ model.A @ d)
            if i == imax:
                res = model.dual_norm(model.gradient(path[i]))
                d = d - 2.0 * along * tang
            else:
                d = d - along * tang
            new[i] = path[i] - step * d
        path = _reparametrize(model, new)
        # the climbing node keeps its own position
        path[imax] = new[imax]
        if res <= cfg.mp_polish:
            u, r_newton, its = newton_solve(model, path[imax], cfg)
            if u is not None:
                cp = classify(model, u, "mountain_pass", cfg, iterations=sweep + its)
                cp.extra["ring_level"] = m_r
                cp.extra["ring_radius"] = radius
                if cp.energy >= m_r and cp.sign_class != "zero":
                    return cp
                log.info("Newton polish left the mountain-pass level; continuing sweeps")
    raise NonConvergenceError("mountain-pass sweeps exhausted", last_residual=res,
                              diagnostics={"sweeps": cfg.mp_max_iter})


# -- export -----------------------------------------------------------------

def export_solutions(mesh, points, out_dir, cfg=None, seed=None, prefix="solution"):
    """Write one CSV and one manifest per critical point.

    Returns the list of manifest file entries (name and checksum).
    """
    cfg = cfg or SolverConfig()
    entries = []
    for i, p in enumerate(points):
        csv_name = f"{prefix}_{i:03d}.csv"
        chk = _io.write_csv(os.path.join(out_dir, csv_name), ["node_index", "x", "u_value"],
                            zip(range(1, mesh.n + 1), mesh.nodes, p.u))
        manifest = p.manifest()
        manifest.update({
            "seed": cfg.seed if seed is None else seed,
            "cfg": cfg.to_dict(),
            "files": [_io.file_entry(csv_name, chk)],
        })
        json_name = f"{prefix}_{i:03d}.json"
        jchk = _io.write_json(os.path.join(out_dir, json_name), manifest)
        entries.append(_io.file_entry(json_name, jchk))
    return entries
