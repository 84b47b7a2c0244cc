"""Reaction terms ``f(x, t)``, their derivatives and primitives.

A :class:`Reaction` bundles three vectorized callables ``f``, ``fprime``
(derivative in ``t``) and ``F`` (primitive with ``F(x, 0) = 0``). The
shipped examples are odd in ``t`` and independent of ``x``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import NumericalDomainError, PreconditionError

__all__ = [
    "Reaction",
    "TruncatedReaction",
    "example_reaction",
    "linear_reaction",
    "table_reaction",
    "truncate",
    "check_hypotheses",
    "DIVERGENCE_SAMPLES",
]

DIVERGENCE_SAMPLES = 10.0 ** np.arange(2, 7)


@dataclass(frozen=True)
class Reaction:
    """Vectorized reaction triple with asymptotic-slope metadata.

    ``meta`` keys used by :func:`check_hypotheses`:

    ``slope_at_zero``
        ``(eta1, eta2)`` band for ``f(x, t) / t`` near zero.
    ``eta0``
        Upper bound for ``2 F(x, t) / t^2`` near zero.
    ``slope_at_infinity``
        ``(lo, hi)`` declared limits of ``f(x, t) / t``.
    ``growth_exponent``
        ``p`` in ``|f| <= a0 (1 + |t|^(p-1))``.
    ``kinks``
        Values of ``t`` where ``f`` is not smooth; quadrature splits there.
    """

    f: object
    fprime: object
    F: object
    meta: dict = field(default_factory=dict)
    name: str = "reaction"

    def __call__(self, x, t):
        return self.f(x, t)

    @property
    def kinks(self):
        return tuple(sorted(self.meta.get("kinks", ())))


@dataclass(frozen=True)
class TruncatedReaction:
    """Sign truncation ``f_+(x, t) = f(x, t^+)`` or ``f_-(x, t) = f(x, -t^-)``."""

    base: Reaction
    sign: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise PreconditionError(f"sign must be +1 or -1, got {self.sign}")

    @property
    def name(self):
        return f"{self.base.name}[{'+' if self.sign > 0 else '-'}]"

    @property
    def meta(self):
        return self.base.meta

    @property
    def kinks(self):
        side = [c for c in self.base.kinks if c * self.sign > 0]
        return tuple(sorted(set(side) | {0.0}))

    def _active(self, t):
        return t >= 0 if self.sign > 0 else t <= 0

    def _clip(self, t):
        return np.maximum(t, 0.0) if self.sign > 0 else np.minimum(t, 0.0)

    def f(self, x, t):
        t = np.asarray(t, dtype=float)
        return self.base.f(x, self._clip(t))

    def fprime(self, x, t):
        t = np.asarray(t, dtype=float)
        return np.where(self._active(t), self.base.fprime(x, self._clip(t)), 0.0)

    def F(self, x, t):
        t = np.asarray(t, dtype=float)
        return np.where(self._active(t), self.base.F(x, self._clip(t)), 0.0)

    def __call__(self, x, t):
        return self.f(x, t)


def truncate(base, sign):
    """Return the ``+`` or ``-`` truncation of ``base``.

    ``sign`` may be ``+1``/``-1`` or the strings ``"+"``/``"-"``.
    """
    if isinstance(base, TruncatedReaction):
        raise PreconditionError("reaction is already truncated")
    if sign in ("+", "plus"):
        sign = 1
    elif sign in ("-", "minus"):
        sign = -1
    return TruncatedReaction(base, int(sign))


def _checked(values):
    if not np.all(np.isfinite(values)):
        raise NumericalDomainError("reaction evaluation returned non-finite values")
    return values


def example_reaction(mu, k, lambdas):
    """Odd, C^1 reaction linear with slope ``mu`` on ``[-1, 1]``.

    Outside ``[-1, 1]``

        f(t) = lambda_k t + sign(t) (mu - lambda_k) (ln|t| / 2 + sqrt|t|),

    so ``f(t) / t -> lambda_k`` while ``f t - 2 F`` diverges. ``lambdas`` is
    the (discrete) spectrum, indexed from ``k = 1``.
    """
    mu = float(mu)
    if not mu > 0:
        raise PreconditionError(f"mu must be positive, got {mu}")
    k = int(k)
    lambdas = np.asarray(lambdas, dtype=float)
    if not 1 <= k <= lambdas.size:
        raise PreconditionError(f"need lambda_{k}, spectrum has {lambdas.size} values")
    lam_k = float(lambdas[k - 1])
    c = mu - lam_k

    def f(x, t):
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        big = np.maximum(a, 1.0)
        outer = lam_k * t + np.sign(t) * c * (0.5 * np.log(big) + np.sqrt(big))
        return _checked(np.where(a <= 1.0, mu * t, outer))

    def fprime(x, t):
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        big = np.maximum(a, 1.0)
        outer = lam_k + c * (0.5 / big + 0.5 / np.sqrt(big))
        return _checked(np.where(a <= 1.0, mu, outer))

    def F(x, t):
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        big = np.maximum(a, 1.0)
        G = 0.5 * (big * np.log(big) - big + 1.0) + (2.0 / 3.0) * (big ** 1.5 - 1.0)
        outer = 0.5 * mu + 0.5 * lam_k * (big ** 2 - 1.0) + c * G
        return _checked(np.where(a <= 1.0, 0.5 * mu * t * t, outer))

    upper = float(lambdas[k]) if lambdas.size > k else None
    meta = {
        "kind": "example",
        "mu": mu,
        "k": k,
        "lambda_k": lam_k,
        "slope_at_zero": (mu, mu),
        "eta0": mu,
        "slope_at_infinity": (lam_k, upper),
        "growth_exponent": 2,
        "delta0": 1.0,
        "kinks": (-1.0, 1.0),
    }
    return Reaction(f, fprime, F, meta, name=f"example(mu={mu!r},k={k})")


def linear_reaction(lam):
    """``f(x, t) = lam t``."""
    lam = float(lam)

    def f(x, t):
        return lam * np.asarray(t, dtype=float)

    def fprime(x, t):
        return np.full(np.shape(t), lam)

    def F(x, t):
        t = np.asarray(t, dtype=float)
        return 0.5 * lam * t * t

    meta = {"kind": "linear", "lambda": lam, "slope_at_zero": (lam, lam), "eta0": lam,
            "slope_at_infinity": (lam, lam), "growth_exponent": 2, "delta0": 1.0}
    return Reaction(f, fprime, F, meta, name=f"linear({lam!r})")


def table_reaction(ts, fs, odd=True):
    """Reaction interpolated from samples ``(t, f(t))`` for ``t >= 0``.

    A monotone cubic (PCHIP) interpolant is used inside the table and the
    end slope is continued linearly beyond it. With ``odd=True`` the table
    describes ``t >= 0`` and is extended by ``f(-t) = -f(t)``.
    """
    ts = np.asarray(ts, dtype=float)
    fs = np.asarray(fs, dtype=float)
    if ts.ndim != 1 or ts.size < 3 or ts.shape != fs.shape:
        raise PreconditionError("table needs at least three (t, f) pairs")
    if np.any(np.diff(ts) <= 0):
        raise PreconditionError("table abscissae must be strictly increasing")
    if odd and (ts[0] != 0.0 or fs[0] != 0.0):
        raise PreconditionError("odd table must start at (0, 0)")
    if not odd and not (ts[0] <= 0.0 <= ts[-1]):
        raise PreconditionError("table must contain t = 0")
    p = PchipInterpolator(ts, fs)
    dp = p.derivative()
    ip = p.antiderivative()
    lo, hi = ts[0], ts[-1]
    s_lo, s_hi = float(dp(lo)), float(dp(hi))
    f_lo, f_hi = float(p(lo)), float(p(hi))
    I0 = float(ip(0.0))

    def _f(t):
        return np.where(t > hi, f_hi + s_hi * (t - hi),
                        np.where(t < lo, f_lo + s_lo * (t - lo), p(np.clip(t, lo, hi))))

    def _fp(t):
        return np.where(t > hi, s_hi, np.where(t < lo, s_lo, dp(np.clip(t, lo, hi))))

    def _F(t):
        inner = ip(np.clip(t, lo, hi)) - I0
        d_hi = np.maximum(t - hi, 0.0)
        d_lo = np.minimum(t - lo, 0.0)
        return inner + f_hi * d_hi + 0.5 * s_hi * d_hi ** 2 + f_lo * d_lo + 0.5 * s_lo * d_lo ** 2

    if odd:
        def f(x, t):
            t = np.asarray(t, dtype=float)
            return _checked(np.sign(t) * _f(np.abs(t)))

        def fprime(x, t):
            return _checked(_fp(np.abs(np.asarray(t, dtype=float))))

        def F(x, t):
            return _checked(_F(np.abs(np.asarray(t, dtype=float))))
    else:
        def f(x, t):
            return _checked(_f(np.asarray(t, dtype=float)))

        def fprime(x, t):
            return _checked(_fp(np.asarray(t, dtype=float)))

        def F(x, t):
            return _checked(_F(np.asarray(t, dtype=float)))

    slope0 = float(dp(0.0)) if lo <= 0.0 <= hi else s_lo
    meta = {"kind": "custom_table", "slope_at_zero": (slope0, slope0), "eta0": slope0,
            "slope_at_infinity": (s_hi, s_hi), "growth_exponent": 2, "delta0": None,
            "kinks": tuple(sorted({float(v) for v in ts} | ({-float(v) for v in ts} if odd else set())))}
    return Reaction(f, fprime, F, meta, name="table")


# -- hypothesis checker -----------------------------------------------------

def _clause(passed, worst=None, **info):
    out = {"passed": bool(passed), "worst": worst}
    out.update(info)
    return out


def check_hypotheses(r, spectrum, mode, k, h=None, delta0=None, x=None,
                     asymptotic_rtol=1e-2, small_t=None):
    """Sample the growth hypotheses for a reaction against a spectrum.

    Parameters
    ----------
    r : Reaction
    spectrum : EigenSet or array_like
        Eigenvalues ``lambda_1 <= lambda_2 <= ...`` (needs ``k + 1`` values).
    mode : {"H1", "H2"}
        ``H1``: linear band ``(eta1, eta2)`` at zero between ``lambda_h`` and
        ``lambda_{h+1}``. ``H2``: ``2 F / t^2 <= eta0 < lambda_1`` near zero
        and ``k >= 2``.
    k : int
        Index of the spectral interval ``[lambda_k, lambda_{k+1}]`` at infinity.
    h : int, optional
        Spectral interval at zero (``H1`` only).
    delta0 : float, optional
        Radius of the zero neighbourhood; defaults to ``meta["delta0"]`` or 1.
    x : array_like, optional
        Sample points in the domain (defaults to ``[0.0]``).
    asymptotic_rtol : float
        Relative slack, in units of ``lambda_k``, for the slope at ``|t| = 1e6``.

    Returns
    -------
    dict
        Per-clause ``{"passed", "worst", ...}`` plus an overall ``passed``.
    """
    mode = str(mode).upper()
    if mode not in ("H1", "H2"):
        raise PreconditionError(f"mode must be H1 or H2, got {mode!r}")
    lam = np.asarray(getattr(spectrum, "lambdas", spectrum), dtype=float)
    k = int(k)
    need = k + 1
    if mode == "H1":
        if h is None:
            raise PreconditionError("H1 check needs the index h")
        h = int(h)
        need = max(need, h + 1)
    if lam.size < need:
        raise PreconditionError(f"spectrum has {lam.size} modes, need {need}")
    if delta0 is None:
        delta0 = r.meta.get("delta0") or 1.0
    x = np.atleast_1d(np.asarray([0.0] if x is None else x, dtype=float))
    X = x[:, None]
    clauses = {}

    # (i) bounded on bounded sets
    worst_i = 0.0
    ok_i = True
    for rho in (1.0, 10.0, 100.0):
        t = np.linspace(-rho, rho, 401)[None, :]
        vals = np.broadcast_to(r.f(X, t), (x.size, t.size))
        if not np.all(np.isfinite(vals)):
            ok_i = False
        worst_i = max(worst_i, float(np.max(np.abs(vals))))
    t = np.concatenate((-DIVERGENCE_SAMPLES[::-1], np.linspace(-1, 1, 201), DIVERGENCE_SAMPLES))
    fv = np.broadcast_to(r.f(X, t[None, :]), (x.size, t.size))
    a0 = float(np.max(np.abs(fv) / (1.0 + np.abs(t))))
    clauses["i_bounded"] = _clause(ok_i, worst_i, growth_a0=a0,
                                   growth_exponent=r.meta.get("growth_exponent", 2))

    # (ii) f t - 2 F diverges to +infinity
    worst_ii = np.inf
    ok_ii = True
    for sgn in (1.0, -1.0):
        t = sgn * DIVERGENCE_SAMPLES[None, :]
        g = np.broadcast_to(r.f(X, t) * t - 2.0 * r.F(X, t), (x.size, t.size))
        inc = np.diff(g, axis=1)
        worst_ii = min(worst_ii, float(inc.min()))
        if not (np.all(inc > 0) and np.all(g[:, -1] > g[:, 0])):
            ok_ii = False
    clauses["ii_divergence"] = _clause(ok_ii, worst_ii)

    # (iii) asymptotic slope inside [lambda_k, lambda_{k+1}]
    lo, hi = lam[k - 1], lam[k]
    tol = asymptotic_rtol * lo
    t = np.array([[-1e6, 1e6]])
    q = np.broadcast_to(r.f(X, t) / t, (x.size, 2))
    below = float(np.max(lo - tol - q))
    above = float(np.max(q - hi - tol))
    ok_iii = below <= 0 and above <= 0
    if mode == "H2" and k < 2:
        ok_iii = False
    clauses["iii_asymptotic_slope"] = _clause(ok_iii, max(below, above), interval=(lo, hi),
                                              slopes=(float(q.min()), float(q.max())), tol=tol)

    # (iv) behaviour at zero
    if small_t is None:
        small_t = np.concatenate((-np.geomspace(delta0, 1e-8, 60), np.geomspace(1e-8, delta0, 60)))
    t = np.asarray(small_t, dtype=float)[None, :]
    if mode == "H1":
        eta1, eta2 = r.meta.get("slope_at_zero", (None, None))
        lh, lh1 = lam[h - 1], lam[h]
        q = np.broadcast_to(r.f(X, t) / t, (x.size, t.shape[1]))
        eps = 1e-12 * max(abs(lh1), 1.0)
        e1 = np.broadcast_to(np.asarray(eta1, dtype=float), x.shape)
        e2 = np.broadcast_to(np.asarray(eta2, dtype=float), x.shape)
        band_ok = bool(np.all(lh - eps <= e1) and np.all(e1 <= e2) and np.all(e2 <= lh1 + eps))
        sample_ok = bool(np.all(q >= e1[:, None] - eps) and np.all(q <= e2[:, None] + eps))
        strict = bool(np.any(e1 > lh + eps) and np.any(e2 < lh1 - eps))
        distinct = abs(lam[k - 1] - lh) > 1e-8 * lam[k - 1]
        worst = float(max(np.max(e1[:, None] - q), np.max(q - e2[:, None])))
        clauses["iv_zero"] = _clause(band_ok and sample_ok and strict and distinct, worst,
                                     band=(float(e1.min()), float(e2.max())),
                                     interval=(lh, lh1), strict=strict, h_differs_from_k=distinct)
    else:
        eta0 = np.broadcast_to(np.asarray(r.meta.get("eta0"), dtype=float), x.shape)
        l1 = lam[0]
        eps = 1e-12 * max(abs(l1), 1.0)
        ratio = np.broadcast_to(2.0 * r.F(X, t) / t ** 2, (x.size, t.shape[1]))
        bound_ok = bool(np.all(eta0 >= 0) and np.all(eta0 <= l1 + eps))
        sample_ok = bool(np.all(ratio <= eta0[:, None] + eps))
        strict = bool(np.any(eta0 < l1 - eps))
        worst = float(np.max(ratio - eta0[:, None]))
        clauses["iv_zero"] = _clause(bound_ok and sample_ok and strict, worst,
                                     eta0=(float(eta0.min()), float(eta0.max())),
                                     lambda_1=float(l1), strict=strict)

    return {
        "mode": mode,
        "k": k,
        "h": h,
        "delta0": float(delta0),
        "clauses": clauses,
        "passed": all(c["passed"] for c in clauses.values()),
    }
