"""Flat ``key = value`` run configuration.

One assignment per line, dotted keys, ``#`` starts a comment::

    domain.a = -1
    domain.b = 1
    mesh.n = 128
    operator.s = 0.5
    reaction.kind = example_h2
    reaction.mu_frac = 0.5
    reaction.k = 2

Every value is validated before any computation starts; problems raise
:class:`~fracmorse.errors.PreconditionError` naming the offending key.
"""

from dataclasses import dataclass, field
import os

import numpy as np

from .assembly import Mesh1D, WeightField
from .errors import PreconditionError
from .variational import SolverConfig

OUT_ENV = "FRACMORSE_OUT"

REACTION_KINDS = ("example_h1", "example_h2", "custom_table", "linear")
PIPELINES = ("minimize", "mountain_pass", "newton_multistart", "all")

# key -> (parser, default); ``None`` default means required
_SCHEMA = {
    "domain.a": (float, -1.0),
    "domain.b": (float, 1.0),
    "mesh.n": (int, None),
    "operator.s": (float, None),
    "weight.kind": (str, "constant"),
    "weight.value": (float, 1.0),
    "weight.values": ("floats", None),
    "spectrum.k_max": (int, 6),
    "reaction.kind": (str, None),
    "reaction.mu": (float, None),
    "reaction.mu_frac": (float, None),
    "reaction.k": (int, 2),
    "reaction.h": (int, None),
    "reaction.lambda": (float, None),
    "reaction.table_t": ("floats", None),
    "reaction.table_f": ("floats", None),
    "solve.pipeline": (str, "all"),
    "solve.start_scale": (float, 0.0),
    "solver.tol": (float, 1e-10),
    "solver.max_iter": (int, 200),
    "solver.seed": (int, 0),
    "solver.n_starts": (int, 64),
    "solver.kernel_tol": (float, 1e-6),
    "verify.k_max": (int, 6),
    "verify.oracle_n": (int, 16),
    "verify.inject_fault": ("bool", False),
    "output.dir": (str, "fracmorse_out"),
}

_OPTIONAL = {"weight.values", "reaction.kind", "reaction.mu", "reaction.mu_frac", "reaction.h",
             "reaction.lambda", "reaction.table_t", "reaction.table_f"}


def _parse_value(key, kind, raw):
    try:
        if kind == "floats":
            vals = [float(v) for v in raw.replace(",", " ").split()]
            if not vals:
                raise ValueError("empty list")
            return vals
        if kind == "bool":
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind is int:
            f = float(raw)
            if f != int(f):
                raise ValueError(raw)
            return int(f)
        if kind is float:
            v = float(raw)
            if not np.isfinite(v):
                raise ValueError(raw)
            return v
        return raw.strip()
    except ValueError as exc:
        raise PreconditionError(f"invalid value for {key}: {raw!r}") from exc


def parse_text(text):
    """Parse config text into a dict of raw strings."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PreconditionError(f"line {lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in _SCHEMA:
            raise PreconditionError(f"line {lineno}: unknown key {key}")
        out[key] = value
    return out


@dataclass
class RunConfig:
    """Validated configuration for one CLI command."""

    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        v = self.values.get(key)
        return default if v is None else v

    @classmethod
    def from_mapping(cls, raw, out_dir=None, seed=None):
        vals = {}
        for key, (kind, default) in _SCHEMA.items():
            if key in raw and raw[key] is not None:
                v = raw[key]
                vals[key] = _parse_value(key, kind, v) if isinstance(v, str) else v
            elif default is None and key not in _OPTIONAL:
                raise PreconditionError(f"missing required key {key}")
            else:
                vals[key] = default
        # default mode counts shrink to fit very coarse meshes
        for key in ("spectrum.k_max", "verify.k_max"):
            if key not in raw and isinstance(vals["mesh.n"], int):
                vals[key] = max(1, min(vals[key], vals["mesh.n"]))
        if os.environ.get(OUT_ENV):
            vals["output.dir"] = os.environ[OUT_ENV]
        if out_dir is not None:
            vals["output.dir"] = out_dir
        if seed is not None:
            vals["solver.seed"] = int(seed)
        cfg = cls(vals)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path, out_dir=None, seed=None):
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise PreconditionError(f"cannot read config {path}: {exc}") from exc
        return cls.from_mapping(parse_text(text), out_dir=out_dir, seed=seed)

    # -- validation -------------------------------------------------------

    def validate(self):
        v = self.values
        self.mesh()
        self.weight()
        for key in ("spectrum.k_max", "verify.k_max"):
            if not 1 <= v[key] <= v["mesh.n"]:
                raise PreconditionError(f"{key} must lie in [1, mesh.n], got {v[key]}")
        if v["solve.pipeline"] not in PIPELINES:
            raise PreconditionError(f"solve.pipeline must be one of {PIPELINES}")
        for key in ("solver.tol", "solver.kernel_tol"):
            if not v[key] > 0:
                raise PreconditionError(f"{key} must be positive")
        for key in ("solver.max_iter", "solver.n_starts", "verify.oracle_n"):
            if v[key] < 1:
                raise PreconditionError(f"{key} must be >= 1")
        if v["reaction.kind"] is not None:
            self.validate_reaction()

    def validate_reaction(self):
        v = self.values
        kind = v["reaction.kind"]
        if kind is None:
            raise PreconditionError("missing required key reaction.kind")
        if kind not in REACTION_KINDS:
            raise PreconditionError(f"reaction.kind must be one of {REACTION_KINDS}")
        if v["reaction.k"] < 1:
            raise PreconditionError("reaction.k must be >= 1")
        if kind in ("example_h1", "example_h2"):
            if (v["reaction.mu"] is None) == (v["reaction.mu_frac"] is None):
                raise PreconditionError("give exactly one of reaction.mu, reaction.mu_frac")
            if v["reaction.mu"] is not None and v["reaction.mu"] <= 0:
                raise PreconditionError("reaction.mu must be positive")
            if v["reaction.mu_frac"] is not None and not v["reaction.mu_frac"] > 0:
                raise PreconditionError("reaction.mu_frac must be positive")
        if kind == "example_h1":
            h = v["reaction.h"]
            if h is None or not 1 <= h < v["reaction.k"]:
                raise PreconditionError("reaction.h must satisfy 1 <= h < reaction.k")
        if kind == "linear" and v["reaction.lambda"] is None:
            raise PreconditionError("missing required key reaction.lambda")
        if kind == "custom_table":
            t, f = v["reaction.table_t"], v["reaction.table_f"]
            if t is None or f is None or len(t) != len(f) or len(t) < 2:
                raise PreconditionError("reaction.table_t and reaction.table_f must be "
                                        "equal-length lists")
        if v["reaction.k"] + 1 > v["mesh.n"]:
            raise PreconditionError("reaction.k + 1 exceeds the number of modes")

    # -- builders ---------------------------------------------------------

    def mesh(self):
        v = self.values
        return Mesh1D(v["domain.a"], v["domain.b"], v["mesh.n"], v["operator.s"])

    def weight(self, mesh=None):
        mesh = mesh or self.mesh()
        v = self.values
        kind = v["weight.kind"]
        if kind == "constant":
            if not v["weight.value"] > 0:
                raise PreconditionError("weight.value must be positive")
            return WeightField.constant(mesh.n, v["weight.value"])
        if kind == "table":
            vals = v["weight.values"]
            if vals is None:
                raise PreconditionError("missing required key weight.values")
            if len(vals) != mesh.n:
                raise PreconditionError(f"weight.values needs {mesh.n} entries, got {len(vals)}")
            return WeightField(np.asarray(vals), label="table")
        raise PreconditionError("weight.kind must be constant or table")

    def solver(self):
        v = self.values
        return SolverConfig(tol=v["solver.tol"], max_iter=v["solver.max_iter"],
                            seed=v["solver.seed"], n_starts=v["solver.n_starts"],
                            kernel_tol=v["solver.kernel_tol"])

    @property
    def out_dir(self):
        return self.values["output.dir"]

    def to_dict(self):
        return {k: v for k, v in sorted(self.values.items()) if k != "output.dir"}
