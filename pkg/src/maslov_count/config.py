"""Config-file parsing and system construction for the CLI.

Format: UTF-8 text with ``key = value`` scalars and ``[name]`` matrix
sections whose rows are comma-separated coefficient expressions in x.
``#`` starts a comment anywhere. Example::

    family = dirac
    n = 2
    window = 0.0, 1.5

    [Q]
    1, 0, 0, 0
    0, 1, 0, 0
    0, 0, 1, 0
    0, 0, 0, 1

    [V]
    .13 + .7*cos(6*pi*x)/(2+cos(6*pi*x)), cos(pi*x)/(2+cos(4*pi*x)), 0, 0
    cos(pi*x)/(2+cos(4*pi*x)), 1, 0, 0
    0, 0, 0, 0
    0, 0, 0, 0

    [alpha]
    0, 0, 1, 0
    0, 0, 0, 1

    [beta]
    0, 0, 1, 0
    0, 0, 0, 1

Families and their matrix sections: ``dirac`` needs Q and V;
``sturm_liouville`` needs P, V, Q; ``block`` needs R, V and the scalar
``r``; ``dae`` needs P11, V11, V12, V22 and the scalar ``m``. Boundary
conditions are either ``[alpha]`` and ``[beta]`` (separated) or
``[theta]`` (general). Recognized scalar options: ``window`` (pair),
``x_samples``, ``lambda_samples``, ``ode_rtol``, ``ode_atol``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ExpressionError
from .expressions import evaluate, parse_expression, to_string
from .systems import (
    DAEReduction,
    GeneralBC,
    SeparatedBC,
    make_block,
    make_dae,
    make_dirac,
    make_sturm_liouville,
)

_FAMILIES = {
    "dirac": ("Q", "V"),
    "sturm_liouville": ("P", "V", "Q"),
    "block": ("R", "V"),
    "dae": ("P11", "V11", "V12", "V22"),
}
_SCALAR_KEYS = {"family", "n", "m", "r", "window", "x_samples",
                "lambda_samples", "ode_rtol", "ode_atol"}
_KNOWN_SECTIONS = {"P", "Q", "V", "R", "P11", "V11", "V12", "V22",
                   "alpha", "beta", "theta"}


@dataclass
class SystemConfig:
    """Parsed and validated configuration."""

    family: str
    matrices: dict  # name -> list of rows of expression ASTs
    scalars: dict = field(default_factory=dict)
    window: tuple = None

    def matrix_shape(self, name):
        rows = self.matrices[name]
        return (len(rows), len(rows[0]))


def _strip_comment(line: str) -> str:
    k = line.find("#")
    return line if k < 0 else line[:k]


def parse_config(text: str) -> SystemConfig:
    """Parse config text; the first problem raises ConfigError with its
    line (and column for expression errors)."""
    scalars = {}
    matrices = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in _KNOWN_SECTIONS:
                raise ConfigError(f"unknown section [{name}]", line=lineno)
            if name in matrices:
                raise ConfigError(f"duplicate section [{name}]", line=lineno)
            matrices[name] = []
            section = name
            continue
        if section is None:
            if "=" not in line:
                raise ConfigError("expected 'key = value' before any section",
                                  line=lineno)
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in _SCALAR_KEYS:
                raise ConfigError(f"unknown key {key!r}", line=lineno)
            if key in scalars:
                raise ConfigError(f"duplicate key {key!r}", line=lineno)
            scalars[key] = value
            continue
        # matrix row
        cells = [c.strip() for c in line.split(",")]
        row = []
        consumed = 0
        for cell in cells:
            try:
                row.append(parse_expression(cell))
            except ExpressionError as exc:
                col = raw.find(cell, consumed) + 1 + (exc.position or 0)
                raise ConfigError(f"bad expression in [{section}]: {exc}",
                                  line=lineno, column=col) from exc
            consumed = raw.find(cell, consumed) + len(cell)
        if matrices[section] and len(row) != len(matrices[section][0]):
            raise ConfigError(f"ragged row in [{section}]", line=lineno)
        matrices[section].append(row)

    if "family" not in scalars:
        raise ConfigError("missing required key 'family'")
    family = scalars.pop("family")
    if family not in _FAMILIES:
        raise ConfigError(f"unknown family {family!r}; expected one of "
                          + ", ".join(sorted(_FAMILIES)))

    window = None
    if "window" in scalars:
        parts = scalars.pop("window").split(",")
        if len(parts) != 2:
            raise ConfigError("window must be 'a, b'")
        try:
            window = (float(parts[0]), float(parts[1]))
        except ValueError as exc:
            raise ConfigError(f"bad window: {exc}") from exc
        if not window[0] < window[1]:
            raise ConfigError("window must satisfy a < b")

    parsed_scalars = {}
    for key, value in scalars.items():
        try:
            parsed_scalars[key] = int(value) if key in ("n", "m", "r", "x_samples", "lambda_samples") else float(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from exc

    cfg = SystemConfig(family=family, matrices=matrices,
                       scalars=parsed_scalars, window=window)
    _validate_dimensions(cfg)
    return cfg


def _validate_dimensions(cfg: SystemConfig):
    need = _FAMILIES[cfg.family]
    for name in need:
        if name not in cfg.matrices:
            raise ConfigError(f"family {cfg.family!r} needs section [{name}]")
    has_sep = "alpha" in cfg.matrices or "beta" in cfg.matrices
    has_gen = "theta" in cfg.matrices
    if has_sep and has_gen:
        raise ConfigError("give either [alpha]/[beta] or [theta], not both")
    if has_sep and ("alpha" not in cfg.matrices or "beta" not in cfg.matrices):
        raise ConfigError("separated conditions need both [alpha] and [beta]")
    if not has_sep and not has_gen:
        raise ConfigError("missing boundary conditions ([alpha]/[beta] or [theta])")

    if cfg.family == "dirac":
        dim = cfg.matrix_shape("Q")[0]
        if dim % 2:
            raise ConfigError("[Q] must be 2n x 2n")
        half = dim // 2
    elif cfg.family == "sturm_liouville":
        half = cfg.matrix_shape("P")[0]
        dim = 2 * half
    elif cfg.family == "block":
        dim = cfg.matrix_shape("V")[0]
        if dim % 2:
            raise ConfigError("[V] must be 2n x 2n")
        half = dim // 2
        if "r" not in cfg.scalars:
            raise ConfigError("family 'block' needs the scalar r")
        if not 1 <= cfg.scalars["r"] <= dim:
            raise ConfigError(f"need 1 <= r <= {dim}")
        if cfg.matrix_shape("R") != (cfg.scalars["r"], cfg.scalars["r"]):
            raise ConfigError("[R] must be r x r")
    else:  # dae
        if "m" not in cfg.scalars:
            raise ConfigError("family 'dae' needs the scalar m")
        m = cfg.scalars["m"]
        if cfg.matrix_shape("P11") != (m, m) or cfg.matrix_shape("V11") != (m, m):
            raise ConfigError("[P11] and [V11] must be m x m")
        k = cfg.matrix_shape("V22")[0]
        if cfg.matrix_shape("V22") != (k, k):
            raise ConfigError("[V22] must be square")
        if cfg.matrix_shape("V12") != (m, k):
            raise ConfigError("[V12] must be m x (n-m)")
        half = m
        dim = 2 * m

    for name, rows in cfg.matrices.items():
        shape = cfg.matrix_shape(name)
        if name in ("Q", "V") and cfg.family in ("dirac", "block") and shape != (dim, dim):
            raise ConfigError(f"[{name}] must be {dim} x {dim}")
        if name in ("P", "Q", "V") and cfg.family == "sturm_liouville" and shape != (half, half):
            raise ConfigError(f"[{name}] must be {half} x {half}")
        if name == "alpha" or name == "beta":
            if shape != (half, 2 * half):
                raise ConfigError(f"[{name}] must be {half} x {2 * half}")
        if name == "theta" and shape != (2 * half, 4 * half):
            raise ConfigError(f"[theta] must be {2 * half} x {4 * half}")
    if "n" in cfg.scalars and cfg.scalars["n"] != half:
        raise ConfigError(f"n = {cfg.scalars['n']} disagrees with matrix sizes (n = {half})")


def _matrix_map(rows):
    """Compile expression rows into a callable x -> complex ndarray."""
    consts = all(
        not _depends_on_x(cell) for row in rows for cell in row
    )
    if consts:
        value = np.array([[complex(evaluate(c, 0.0)) for c in row] for row in rows])
        return lambda x: value
    def f(x):
        return np.array([[complex(evaluate(c, x)) for c in row] for row in rows])
    return f


def _depends_on_x(node) -> bool:
    from .expressions import BinOp, Call, Neg, Var

    if isinstance(node, Var):
        return True
    if isinstance(node, Neg):
        return _depends_on_x(node.arg)
    if isinstance(node, Call):
        return _depends_on_x(node.arg)
    if isinstance(node, BinOp):
        return _depends_on_x(node.left) or _depends_on_x(node.right)
    return False


def _constant_matrix(rows):
    return np.array([[complex(evaluate(c, 0.0)) for c in row] for row in rows])


def build_system(cfg: SystemConfig):
    """Instantiate (system, bc, window, options) from a parsed config."""
    mm = {name: _matrix_map(rows) for name, rows in cfg.matrices.items()
          if name not in ("alpha", "beta", "theta")}
    if cfg.family == "dirac":
        sys = make_dirac(Q=mm["Q"], V=mm["V"])
    elif cfg.family == "sturm_liouville":
        sys = make_sturm_liouville(P=mm["P"], V=mm["V"], Q=mm["Q"])
    elif cfg.family == "block":
        sys = make_block(R=mm["R"], V=mm["V"], r=cfg.scalars["r"])
    else:
        red = DAEReduction(m=cfg.scalars["m"], p11=mm["P11"], v11=mm["V11"],
                           v12=mm["V12"], v22=mm["V22"])
        if cfg.window is None:
            raise ConfigError("family 'dae' needs a window")
        sys = make_dae(red, cfg.window)

    try:
        if "theta" in cfg.matrices:
            bc = GeneralBC(theta=_constant_matrix(cfg.matrices["theta"]))
        else:
            bc = SeparatedBC(alpha=_constant_matrix(cfg.matrices["alpha"]),
                             beta=_constant_matrix(cfg.matrices["beta"]))
    except ValueError as exc:
        raise ConfigError(f"invalid boundary condition: {exc}") from exc

    options = {k: v for k, v in cfg.scalars.items()
               if k in ("x_samples", "lambda_samples", "ode_rtol", "ode_atol")}
    return sys, bc, cfg.window, options


def serialize_config(cfg: SystemConfig) -> str:
    """Write a config back to text; parsing the output reproduces the ASTs."""
    lines = [f"family = {cfg.family}"]
    for key, value in sorted(cfg.scalars.items()):
        lines.append(f"{key} = {value}")
    if cfg.window is not None:
        lines.append(f"window = {cfg.window[0]!r}, {cfg.window[1]!r}")
    for name in sorted(cfg.matrices):
        lines.append("")
        lines.append(f"[{name}]")
        for row in cfg.matrices[name]:
            lines.append(", ".join(to_string(cell) for cell in row))
    return "\n".join(lines) + "\n"
