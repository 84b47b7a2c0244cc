"""Discrete Gagliardo form and weighted mass matrices on an interval.

Piecewise-linear hat functions on a uniform partition of ``(a, b)`` span a
subspace of functions that vanish outside the interval. The stiffness
matrix is the Gagliardo bilinear form over the whole plane,

    A[i, j] = int int (phi_i(x) - phi_i(y)) (phi_j(x) - phi_j(y))
              / |x - y|^(1 + 2 s) dx dy,

with the normalization constant fixed to one.

Two independent routes compute ``A``:

* :func:`assemble_stiffness` uses translation invariance. On a uniform grid
  extended to the whole line the form only depends on ``|i - j|``, and the
  integrand reduces to a one-dimensional integral against the
  autocorrelation of the hat function (the centered cubic B-spline). The
  result is exact up to rounding.
* :func:`oracle_stiffness` splits the plane into ``Omega x Omega`` plus
  the complement correction ``2 int phi_i phi_j k_c``. It integrates the
  former element pair by element pair with Gauss rules on dyadically graded
  subcells. ``k_c`` is the closed-form tail integral.
"""

from dataclasses import dataclass, field
import os

import numpy as np
from numpy.polynomial import Polynomial
from scipy.linalg import toeplitz

from .errors import AssemblyError, OracleError, PreconditionError
from . import io as _io

__all__ = [
    "Mesh1D",
    "WeightField",
    "OperatorPair",
    "assemble_stiffness",
    "assemble_mass",
    "oracle_stiffness",
    "stiffness_symbol",
    "build_operators",
    "complement_kernel",
    "export_matrix",
    "ASSEMBLY_TOL",
    "ORACLE_RTOL",
    "ORACLE_MAX_N",
]

ASSEMBLY_TOL = 1e-10
ORACLE_RTOL = 1e-8
ORACLE_MAX_N = 64


@dataclass(frozen=True)
class Mesh1D:
    """Uniform partition of ``(a, b)`` with ``n`` interior nodes.

    Parameters
    ----------
    a, b : float
        Interval endpoints, ``b > a``.
    n : int
        Number of interior nodes (degrees of freedom).
    s : float
        Fractional order in ``(0, 1)``.
    """

    a: float
    b: float
    n: int
    s: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or not self.b > self.a:
            raise PreconditionError(f"need finite b > a, got a={self.a}, b={self.b}")
        if int(self.n) != self.n or self.n < 1:
            raise PreconditionError(f"n must be a positive integer, got {self.n}")
        if not 0.0 < self.s < 1.0:
            raise PreconditionError(f"s must lie in (0, 1), got {self.s}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "s", float(self.s))

    @property
    def h(self):
        return (self.b - self.a) / (self.n + 1)

    @property
    def nodes(self):
        """Interior node coordinates ``a + i h``, ``i = 1..n``."""
        return self.a + self.h * np.arange(1, self.n + 1)

    def refine(self):
        """Mesh with the cell size halved (``2 n + 1`` interior nodes)."""
        return Mesh1D(self.a, self.b, 2 * self.n + 1, self.s)

    def interpolate(self, fn):
        """Nodal interpolant of ``fn``, zero outside the interval."""
        return np.asarray(fn(self.nodes), dtype=float)


@dataclass(frozen=True)
class WeightField:
    """Nodal values of a weight ``eta >= eta0 > 0``.

    ``eta0`` defaults to the smallest nodal value. Between nodes the weight
    is interpolated linearly; on the two boundary cells it is held at the
    adjacent interior value.
    """

    values: np.ndarray
    eta0: float = None
    label: str = "custom"

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        if vals.size == 0 or not np.all(np.isfinite(vals)):
            raise PreconditionError("weight values must be a non-empty finite vector")
        eta0 = float(vals.min()) if self.eta0 is None else float(self.eta0)
        if not eta0 > 0:
            raise PreconditionError(f"weight lower bound must be positive, got {eta0}")
        if np.any(vals < eta0):
            i = int(np.argmin(vals))
            raise PreconditionError(
                f"weight value {vals[i]} at node {i} is below eta0={eta0}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "eta0", eta0)

    @classmethod
    def constant(cls, n, c=1.0):
        return cls(np.full(int(n), float(c)), label=f"constant({float(c)!r})")

    @classmethod
    def from_function(cls, mesh, fn, label="function"):
        return cls(mesh.interpolate(fn), label=label)

    @classmethod
    def bump(cls, mesh, base=1.0, amplitude=1.0, width=None):
        """``base + amplitude * exp(-((x - c) / w)^2)`` centred on the interval."""
        c = 0.5 * (mesh.a + mesh.b)
        w = 0.2 * (mesh.b - mesh.a) if width is None else float(width)
        return cls(mesh.interpolate(lambda x: base + amplitude * np.exp(-((x - c) / w) ** 2)),
                   eta0=base, label=f"bump({base!r},{amplitude!r})")

    @classmethod
    def ramp(cls, mesh, left=1.0, right=2.0):
        """Linear profile from ``left`` at ``a`` to ``right`` at ``b``."""
        return cls(mesh.interpolate(
            lambda x: left + (right - left) * (x - mesh.a) / (mesh.b - mesh.a)),
            eta0=min(left, right), label=f"ramp({left!r},{right!r})")

    def scaled(self, c):
        return WeightField(c * self.values, eta0=c * self.eta0,
                           label=f"{float(c)!r}*{self.label}")

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, WeightField):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())


@dataclass(frozen=True)
class OperatorPair:
    """Stiffness ``A``, plain mass ``M`` and weighted mass ``M_eta``."""

    A: np.ndarray
    M: np.ndarray
    M_eta: np.ndarray
    mesh: Mesh1D = None
    eta: WeightField = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for name in ("A", "M", "M_eta"):
            mat = np.array(getattr(self, name), dtype=float)
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
                raise PreconditionError(f"{name} must be a square matrix")
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)
        if not (self.A.shape == self.M.shape == self.M_eta.shape):
            raise PreconditionError("operator shapes disagree")

    @property
    def n(self):
        return self.A.shape[0]

    def with_weight(self, eta):
        """Same stiffness and mass, new weighted mass."""
        if self.mesh is None:
            raise PreconditionError("operator pair carries no mesh")
        return OperatorPair(self.A, self.M, assemble_mass(self.mesh, eta),
                            mesh=self.mesh, eta=eta)


# -- exact translation-invariant stiffness ---------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


def _bspline(t):
    """Autocorrelation of the unit hat function (centered cubic B-spline)."""
    t = np.abs(np.asarray(t, dtype=float))
    return np.where(t <= 1.0, 2.0 / 3.0 - t ** 2 + 0.5 * t ** 3,
                    np.where(t <= 2.0, (2.0 - t) ** 3 / 6.0, 0.0))


def _bspline_piece(j):
    # polynomial form of the B-spline on [j, j + 1]
    t = Polynomial([0.0, 1.0])
    if j == 0:
        return 2.0 / 3.0 - t ** 2 + 0.5 * t ** 3
    if j == 1:
        return (2.0 - t) ** 3 / 6.0
    if j == -1:
        return 2.0 / 3.0 - t ** 2 - 0.5 * t ** 3
    if j == -2:
        return (2.0 + t) ** 3 / 6.0
    return Polynomial([0.0])


def _symbol_entry(m, s):
    # c(m) = 2 int_0^inf z^(-1-2s) D_m(z) dz,
    # D_m(z) = 2 L(m) - L(m + z) - L(m - z)
    lam_m = float(_bspline(m))
    z = Polynomial([0.0, 1.0])
    D = 2.0 * lam_m - _bspline_piece(m)(m + z) - _bspline_piece(m - 1)(m - z)
    coef = np.zeros(4)
    coef[:len(D.coef)] = D.coef
    if abs(coef[0]) > 1e-12 or abs(coef[1]) > 1e-12:
        raise AssemblyError(f"non-vanishing low-order terms near the diagonal "
                            f"for offset {m}", entry=(0, m))
    total = sum(coef[k] / (k - 2.0 * s) for k in (2, 3))
    if m <= 1:
        js = range(1, m + 2)
    else:
        js = range(max(1, m - 2), m + 2)
    for j in js:
        zz = j + 0.5 + 0.5 * _GL_X
        Dz = 2.0 * lam_m - _bspline(m + zz) - _bspline(m - zz)
        total += 0.5 * np.dot(_GL_W, Dz * zz ** (-1.0 - 2.0 * s))
    if lam_m != 0.0:
        total += 2.0 * lam_m * (m + 2.0) ** (-2.0 * s) / (2.0 * s)
    return 2.0 * total


def stiffness_symbol(s, m_max):
    """Stiffness entries ``c(0..m_max)`` for unit spacing.

    ``A[i, j] = h^(1 - 2 s) c(|i - j|)`` on a grid of spacing ``h``.
    """
    if not 0.0 < s < 1.0:
        raise PreconditionError(f"s must lie in (0, 1), got {s}")
    return np.array([_symbol_entry(m, s) for m in range(int(m_max) + 1)])


def assemble_stiffness(mesh):
    """Gagliardo stiffness matrix for the hat basis of ``mesh``.

    Returns a dense symmetric positive definite ``n x n`` array.
    """
    c = stiffness_symbol(mesh.s, mesh.n - 1)
    if not np.all(np.isfinite(c)):
        bad = int(np.flatnonzero(~np.isfinite(c))[0])
        raise AssemblyError(f"non-finite stiffness entry at offset {bad}", entry=(0, bad))
    A = mesh.h ** (1.0 - 2.0 * mesh.s) * toeplitz(c)
    return A


# -- mass -------------------------------------------------------------------

def assemble_mass(mesh, eta=None):
    """Weighted mass matrix ``int eta phi_i phi_j`` with piecewise-linear eta.

    ``eta=None`` gives the plain L2 mass matrix. The integrand is a cubic on
    each cell, so the element formulas below are exact.
    """
    n, h = mesh.n, mesh.h
    if eta is None:
        vals = np.ones(n)
    else:
        vals = np.asarray(getattr(eta, "values", eta), dtype=float).ravel()
        if vals.size != n:
            raise PreconditionError(f"weight has {vals.size} values, mesh has {n} nodes")
        if not np.all(vals > 0):
            raise PreconditionError("weight must be positive at every node")
    # nodal values on 0..n+1, boundary cells held at the adjacent interior value
    ext = np.concatenate(([vals[0]], vals, [vals[-1]]))
    left, right = ext[:-1], ext[1:]
    # cell p spans nodes p, p+1; local integrals of eta*l0^2, eta*l0*l1, eta*l1^2
    m00 = h * (left / 4.0 + right / 12.0)
    m01 = h * (left + right) / 12.0
    m11 = h * (left / 12.0 + right / 4.0)
    diag = m11[:-1] + m00[1:]
    off = m01[1:-1]
    M = np.diag(diag)
    if n > 1:
        M += np.diag(off, 1) + np.diag(off, -1)
    return M


def build_operators(mesh, eta=None, A=None):
    """Assemble an :class:`OperatorPair` (``eta=None`` means unit weight)."""
    if eta is None:
        eta = WeightField.constant(mesh.n, 1.0)
    if A is None:
        A = assemble_stiffness(mesh)
    return OperatorPair(A, assemble_mass(mesh), assemble_mass(mesh, eta),
                        mesh=mesh, eta=eta)


# -- brute-force oracle -----------------------------------------------------

_Q1_X, _Q1_W = np.polynomial.legendre.leggauss(20)
_Q1_X = 0.5 * (_Q1_X + 1.0)
_Q1_W = 0.5 * _Q1_W


def complement_kernel(x, a, b, s):
    """``int_{R \\ (a,b)} |x - y|^(-1-2s) dy`` for ``a < x < b``."""
    x = np.asarray(x, dtype=float)
    return ((x - a) ** (-2.0 * s) + (b - x) ** (-2.0 * s)) / (2.0 * s)


def _dyadic(levels):
    edges = 2.0 ** -np.arange(levels + 1)
    return list(zip(edges[1:], edges[:-1]))


def _same_cell_rule(levels):
    # unit cell, xi > eta, z = xi - eta graded toward 0; weight doubled for symmetry
    zs, xis, ws = [], [], []
    for lo, hi in _dyadic(levels):
        z = lo + (hi - lo) * _Q1_X
        wz = (hi - lo) * _Q1_W
        L = 1.0 - z
        xis.append((z[:, None] + L[:, None] * _Q1_X[None, :]).ravel())
        zs.append(np.repeat(z, _Q1_X.size))
        ws.append((2.0 * wz[:, None] * L[:, None] * _Q1_W[None, :]).ravel())
    return np.concatenate(zs), np.concatenate(xis), np.concatenate(ws)


def _touching_rule(levels):
    # x = c + xi, y = c - zeta on unit cells, graded toward the shared vertex
    X, Y = np.meshgrid(_Q1_X, _Q1_X, indexing="ij")
    W2 = np.outer(_Q1_W, _Q1_W)
    xi, ze, w = [], [], []
    for l in range(levels):
        r = 2.0 ** -(l + 1)
        for lx, ly in ((r, 0.0), (0.0, r), (r, r)):
            xi.append((lx + r * X).ravel())
            ze.append((ly + r * Y).ravel())
            w.append((r * r * W2).ravel())
    return np.concatenate(xi), np.concatenate(ze), np.concatenate(w)


def _hat(i, x, a, h):
    return np.clip(1.0 - np.abs((x - (a + i * h)) / h), 0.0, None)


def oracle_stiffness(mesh, levels=90, max_points=int(5e8)):
    """Independent quadrature evaluation of the stiffness matrix.

    Intended for cross-validation only; limited to ``n <= 64``.

    Parameters
    ----------
    levels : int
        Number of dyadic grading levels toward the kernel singularity.
    max_points : int
        Budget on the total number of kernel evaluations.
    """
    n, s, a, b, h = mesh.n, mesh.s, mesh.a, mesh.b, mesh.h
    if n > ORACLE_MAX_N:
        raise PreconditionError(f"oracle is limited to n <= {ORACLE_MAX_N}, got {n}")
    same = _same_cell_rule(levels)
    touch = _touching_rule(min(levels, 60))
    X, Y = np.meshgrid(_Q1_X, _Q1_X, indexing="ij")
    far_w = np.outer(_Q1_W, _Q1_W).ravel() * h * h
    budget = (n + 1) * same[0].size + n * touch[0].size + (n + 1) ** 2 * far_w.size
    if budget > max_points:
        raise OracleError(f"oracle needs {budget} kernel evaluations, budget {max_points}")

    A = np.zeros((n, n))

    def cell_nodes(p):
        return [i for i in (p, p + 1) if 1 <= i <= n]

    # Omega x Omega, cells p <= q; cell p = [a + p h, a + (p+1) h]
    for p in range(n + 1):
        for q in range(p, n + 1):
            idx = sorted(set(cell_nodes(p)) | set(cell_nodes(q)))
            if not idx:
                continue
            gap = q - p
            if gap == 0:
                z, _, wt = same
                dist = h * z
                # on a single cell each hat is linear: difference = slope * (x - y)
                W = [(1.0 if i == p + 1 else -1.0) * z for i in idx]
                wt = h * h * wt
                fac = 1.0
            elif gap == 1:
                xi, ze, wt = touch
                c = a + q * h
                x, y = c + h * xi, c - h * ze
                dist = h * (xi + ze)
                W = [_hat(i, x, a, h) - _hat(i, y, a, h) for i in idx]
                wt = h * h * wt
                fac = 2.0
            else:
                x = (a + q * h + h * X).ravel()
                y = (a + p * h + h * Y).ravel()
                dist = x - y
                W = [_hat(i, x, a, h) - _hat(i, y, a, h) for i in idx]
                wt = far_w
                fac = 2.0
            kw = fac * wt * dist ** (-1.0 - 2.0 * s)
            for ii, i in enumerate(idx):
                for jj, j in enumerate(idx[ii:], start=ii):
                    val = np.dot(kw, W[ii] * W[jj])
                    A[i - 1, j - 1] += val
                    if j != i:
                        A[j - 1, i - 1] += val

    # complement correction 2 int phi_i phi_j k_c
    grad_t = np.concatenate([lo + (hi - lo) * _Q1_X for lo, hi in _dyadic(60)])
    grad_w = np.concatenate([(hi - lo) * _Q1_W for lo, hi in _dyadic(60)])
    for p in range(n + 1):
        if p == 0:
            dl, dr = h * grad_t, (b - a) - h * grad_t
            x, wt = a + h * grad_t, h * grad_w
        elif p == n:
            dr, dl = h * grad_t, (b - a) - h * grad_t
            x, wt = b - h * grad_t, h * grad_w
        else:
            x = a + p * h + h * _Q1_X
            wt = h * _Q1_W
            dl, dr = x - a, b - x
        kc = (dl ** (-2.0 * s) + dr ** (-2.0 * s)) / (2.0 * s)
        idx = cell_nodes(p)
        for i in idx:
            for j in idx:
                A[i - 1, j - 1] += 2.0 * np.dot(wt, _hat(i, x, a, h) * _hat(j, x, a, h) * kc)

    if not np.all(np.isfinite(A)):
        raise OracleError("oracle produced non-finite entries")
    return A


# -- export -----------------------------------------------------------------

def export_matrix(mesh, A, out_dir, name="stiffness", tolerance=ASSEMBLY_TOL):
    """Write ``A`` as row-major (row, col, value) triplets plus a manifest.

    Returns the manifest dictionary; the manifest itself is written to
    ``<name>.json`` next to ``<name>.csv``.
    """
    A = np.asarray(A)
    rows, cols = np.indices(A.shape)
    csv_name = f"{name}.csv"
    checksum = _io.write_csv(
        os.path.join(out_dir, csv_name), ["row", "col", "value"],
        zip(rows.ravel(), cols.ravel(), A.ravel()))
    manifest = {
        "a": mesh.a, "b": mesh.b, "n": mesh.n, "s": mesh.s,
        "tolerance": tolerance,
        "checksum": checksum,
        "files": [_io.file_entry(csv_name, checksum)],
    }
    _io.write_json(os.path.join(out_dir, f"{name}.json"), manifest)
    return manifest
