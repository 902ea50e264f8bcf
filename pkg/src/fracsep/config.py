"""Experiment configuration files.

A config is an INI-style text file (UTF-8, ``#`` or ``;`` comments)::

    [problem]
    alpha = 0.65
    kind = linear-coeff          # linear-coeff | nonlinear | shifted
    coefficient = paper-ex1      # a(t) for f = a(t)*x: built-in name or formula in t
    # rhs = -x - x^3             # f(t, x): built-in name or formula in t and x
    # lambda = -1                # value for the const-lambda built-in
    # lipschitz = 13             # formula in t; default: derived from the envelope
    x0 = 1, 2
    t_end = 6
    h = 1e-3

    [box]                        # state samples for sampled envelopes
    x_min = -10
    x_max = 10
    deadzone = 1e-4
    n_x = 2001

    [shoot]
    target = 0.5                 # x(T)
    tol = 1e-8
    max_iter = 100
    guided = true                # use the coefficient envelope

    [output]
    path = out.csv

Built-ins: ``paper-ex1`` is a(t) = -(1 + 4t + 3 cos 4t)/2, ``const-lambda``
is a(t) = lambda, ``cubic-damped`` is f(t, x) = -x - x^3.  Unknown sections
or keys and out-of-range values are rejected with the offending line.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
import re
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .envelope import SamplingBox
from .errors import ConfigError
from .expr import ExpressionError, Formula

__all__ = ["BUILTINS", "KINDS", "ExperimentConfig", "ShootSettings", "load_config", "parse_config"]

KINDS = ("linear-coeff", "nonlinear", "shifted")

SCHEMA = {
    "problem": ("alpha", "kind", "coefficient", "rhs", "lambda", "lipschitz", "x0", "t_end", "h"),
    "box": ("x_min", "x_max", "deadzone", "n_x"),
    "shoot": ("target", "tol", "max_iter", "guided"),
    "output": ("path",),
}


def example_coefficient(t):
    return -0.5 * (1.0 + 4.0 * t + 3.0 * np.cos(4.0 * t))


def cubic_damped(t, x):
    return -x - x**3


BUILTINS = ("paper-ex1", "const-lambda", "cubic-damped")


@dataclasses.dataclass(frozen=True)
class ShootSettings:
    target: Optional[float] = None
    tol: float = 1e-8
    max_iter: int = 100
    guided: bool = True


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    alpha: float
    kind: str
    rhs: Callable
    coefficient: Optional[Callable]
    x0: tuple
    t_end: float
    h: float = 1e-3
    lipschitz: Optional[Callable] = None
    box: SamplingBox = SamplingBox()
    shoot: ShootSettings = ShootSettings()
    output: Optional[str] = None
    source: str = "<config>"


class _Lines:
    """1-based line numbers of section headers and keys in the raw text."""

    _section = re.compile(r"^\s*\[([^\]]+)\]")
    _key = re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")

    def __init__(self, text):
        self.sections = {}
        self.keys = {}
        current = None
        for no, line in enumerate(text.splitlines(), start=1):
            m = self._section.match(line)
            if m:
                current = m.group(1).strip()
                self.sections.setdefault(current, no)
                continue
            m = self._key.match(line)
            if m and current is not None and not line[:1].isspace():
                self.keys.setdefault((current, m.group(1).strip().lower()), no)

    def of(self, section, key=None):
        if key is None:
            return self.sections.get(section)
        return self.keys.get((section, key), self.sections.get(section))


def _number(raw, name, line, lo=-math.inf, hi=math.inf, lo_open=False, hi_open=False):
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{name} must be a number, got {raw!r}", line) from None
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite, got {raw!r}", line)
    bad_lo = value <= lo if lo_open else value < lo
    bad_hi = value >= hi if hi_open else value > hi
    if bad_lo or bad_hi:
        left = "(" if lo_open else "["
        right = ")" if hi_open else "]"
        raise ConfigError(f"{name} = {value!r} is outside {left}{lo}, {hi}{right}", line)
    return value


def _integer(raw, name, line, lo):
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}", line) from None
    if value < lo:
        raise ConfigError(f"{name} must be >= {lo}, got {value}", line)
    return value


def _boolean(raw, name, line):
    states = configparser.ConfigParser.BOOLEAN_STATES
    if raw.lower() not in states:
        raise ConfigError(f"{name} must be true or false, got {raw!r}", line)
    return states[raw.lower()]


def _formula(raw, name, line, allowed):
    try:
        f = Formula(raw)
    except ExpressionError as exc:
        raise ConfigError(f"{name}: {exc}", line) from None
    extra = f.variables - set(allowed)
    if extra:
        raise ConfigError(f"{name} may only use {', '.join(allowed)}; found {', '.join(sorted(extra))}", line)
    return f


def _constant(value):
    return lambda t: value + 0.0 * np.asarray(t, dtype=float)


def parse_config(text: str, source: str = "<config>", h_override: Optional[float] = None) -> ExperimentConfig:
    lines = _Lines(text)
    cp = configparser.ConfigParser(
        inline_comment_prefixes=("#", ";"), interpolation=None, strict=True, default_section="\0defaults"
    )
    try:
        cp.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("content before the first [section] header", exc.lineno) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigError(exc.message.split(": ", 1)[-1], exc.lineno) from None
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", line) from None

    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]", lines.of(section))
        for key in cp[section]:
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]", lines.of(section, key))
    if not cp.has_section("problem"):
        raise ConfigError("missing [problem] section")

    prob = cp["problem"]

    def where(key, section="problem"):
        return lines.of(section, key)

    def required(key):
        if key not in prob:
            raise ConfigError(f"missing key {key!r} in [problem]", lines.of("problem"))
        return prob[key]

    alpha = _number(required("alpha"), "alpha", where("alpha"), 0.0, 1.0, lo_open=True)
    kind = prob.get("kind", "linear-coeff")
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {', '.join(KINDS)}, got {kind!r}", where("kind"))
    t_end = _number(required("t_end"), "t_end", where("t_end"), 0.0, lo_open=True)
    h = _number(prob.get("h", "1e-3"), "h", where("h"), 0.0, t_end, lo_open=True)
    if h_override is not None:
        if not (h_override > 0 and h_override <= t_end):
            raise ConfigError(f"--h = {h_override!r} must lie in (0, t_end]")
        h = h_override

    raw_x0 = [s for s in re.split(r"[,\s]+", required("x0").strip()) if s]
    if not 1 <= len(raw_x0) <= 2:
        raise ConfigError(f"x0 takes one or two values, got {len(raw_x0)}", where("x0"))
    x0 = tuple(_number(v, "x0", where("x0")) for v in raw_x0)

    lam = None
    if "lambda" in prob:
        lam = _number(prob["lambda"], "lambda", where("lambda"))

    coefficient = None
    if "coefficient" in prob:
        raw = prob["coefficient"]
        if raw == "paper-ex1":
            coefficient = example_coefficient
        elif raw == "const-lambda":
            if lam is None:
                raise ConfigError("const-lambda needs a 'lambda' value", where("coefficient"))
            coefficient = _constant(lam)
        elif raw in BUILTINS:
            raise ConfigError(f"{raw!r} is a right-hand side, use 'rhs = {raw}'", where("coefficient"))
        else:
            coefficient = _formula(raw, "coefficient", where("coefficient"), ("t",))

    rhs = None
    if "rhs" in prob:
        raw = prob["rhs"]
        if raw == "cubic-damped":
            rhs = cubic_damped
        elif raw in BUILTINS:
            raise ConfigError(f"{raw!r} is a coefficient, use 'coefficient = {raw}'", where("rhs"))
        else:
            rhs = _formula(raw, "rhs", where("rhs"), ("t", "x"))

    if coefficient is not None and rhs is not None:
        raise ConfigError("give either 'coefficient' or 'rhs', not both", where("rhs"))
    if coefficient is None and rhs is None:
        raise ConfigError("one of 'coefficient' or 'rhs' is required", lines.of("problem"))
    if kind == "linear-coeff" and coefficient is None:
        raise ConfigError("kind linear-coeff needs 'coefficient'", where("rhs"))
    if coefficient is not None:
        a = coefficient
        rhs = lambda t, x: a(t) * x  # noqa: E731

    lipschitz = None
    if "lipschitz" in prob:
        lipschitz = _formula(prob["lipschitz"], "lipschitz", where("lipschitz"), ("t",))

    box = SamplingBox()
    if cp.has_section("box"):
        sec = cp["box"]
        vals = {}
        for key in ("x_min", "x_max", "deadzone"):
            if key in sec:
                vals[key] = _number(sec[key], key, where(key, "box"))
        if "deadzone" in vals and vals["deadzone"] <= 0:
            raise ConfigError("deadzone must be positive", where("deadzone", "box"))
        if "n_x" in sec:
            vals["n_x"] = _integer(sec["n_x"], "n_x", where("n_x", "box"), 2)
        if not vals.get("x_min", box.x_min) < vals.get("x_max", box.x_max):
            raise ConfigError("x_min must be below x_max", lines.of("box"))
        box = dataclasses.replace(box, **vals)
        if not np.any(np.abs(np.linspace(box.x_min, box.x_max, box.n_x)) >= box.deadzone):
            raise ConfigError("no state samples outside the deadzone", lines.of("box"))

    shoot = ShootSettings()
    if cp.has_section("shoot"):
        sec = cp["shoot"]
        vals = {}
        if "target" in sec:
            vals["target"] = _number(sec["target"], "target", where("target", "shoot"))
        if "tol" in sec:
            vals["tol"] = _number(sec["tol"], "tol", where("tol", "shoot"), 0.0, lo_open=True)
        if "max_iter" in sec:
            vals["max_iter"] = _integer(sec["max_iter"], "max_iter", where("max_iter", "shoot"), 1)
        if "guided" in sec:
            vals["guided"] = _boolean(sec["guided"], "guided", where("guided", "shoot"))
        shoot = dataclasses.replace(shoot, **vals)

    output = None
    if cp.has_section("output") and "path" in cp["output"]:
        output = cp["output"]["path"]

    return ExperimentConfig(
        alpha=alpha,
        kind=kind,
        rhs=rhs,
        coefficient=coefficient,
        x0=x0,
        t_end=t_end,
        h=h,
        lipschitz=lipschitz,
        box=box,
        shoot=shoot,
        output=output,
        source=source,
    )


def load_config(path, h_override=None) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {str(path)!r}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"{str(path)!r} is not valid UTF-8") from None
    return parse_config(text, source=str(path), h_override=h_override)
