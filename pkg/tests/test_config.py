import math
from pathlib import Path

import numpy as np
import pytest

from conftest import a_ex1
from fracsep import ConfigError, SamplingBox
from fracsep.config import load_config, parse_config

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

BASE = """\
[problem]
alpha = 0.65
coefficient = paper-ex1
x0 = 1, 2
t_end = 6
"""


def test_minimal_config_defaults():
    cfg = parse_config(BASE)
    assert cfg.alpha == 0.65 and cfg.kind == "linear-coeff"
    assert cfg.x0 == (1.0, 2.0) and cfg.t_end == 6.0 and cfg.h == 1e-3
    assert cfg.box == SamplingBox() and cfg.output is None
    t = np.linspace(0, 6, 7)
    assert np.array_equal(cfg.coefficient(t), a_ex1(t))
    assert cfg.rhs(1.0, 2.0) == pytest.approx(2.0 * a_ex1(1.0))


def test_shipped_configs_load():
    for path in sorted(CONFIGS.glob("*.ini")):
        cfg = load_config(path)
        assert cfg.source == str(path)


def test_builtins():
    cfg = parse_config(BASE.replace("paper-ex1", "const-lambda") + "lambda = -1.5\n")
    assert cfg.coefficient(np.zeros(3)).tolist() == [-1.5] * 3
    cfg = parse_config(BASE.replace("coefficient = paper-ex1", "kind = nonlinear\nrhs = cubic-damped"))
    assert cfg.coefficient is None and cfg.rhs(0.0, 2.0) == -10.0


def test_expression_rhs_and_sections():
    text = BASE.replace("coefficient = paper-ex1", "kind = shifted\nrhs = -x + cos(t)") + (
        "lipschitz = 1 + t\n"
        "[box]\nx_min = -3\nx_max = 4\ndeadzone = 1e-4\nn_x = 51\n"
        "[shoot]\ntarget = 0.2\ntol = 1e-7\nmax_iter = 30\nguided = no\n"
        "[output]\npath = out.csv\n"
    )
    cfg = parse_config(text, h_override=1e-2)
    assert cfg.rhs(0.0, 1.0) == 0.0
    assert cfg.lipschitz(2.0) == 3.0
    assert cfg.box == SamplingBox(-3.0, 4.0, 1e-4, 51)
    assert (cfg.shoot.target, cfg.shoot.tol, cfg.shoot.max_iter, cfg.shoot.guided) == (0.2, 1e-7, 30, False)
    assert cfg.output == "out.csv" and cfg.h == 1e-2


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        (BASE + "colour = red\n", 6, "unknown key 'colour'"),
        (BASE.replace("0.65", "1.65"), 2, "alpha = 1.65 is outside (0.0, 1.0]"),
        (BASE.replace("0.65", "0"), 2, "outside"),
        (BASE.replace("0.65", "abc"), 2, "alpha must be a number"),
        (BASE.replace("t_end = 6", "t_end = -1"), 5, "t_end"),
        (BASE + "h = 7\n", 6, "h = 7.0 is outside"),
        (BASE.replace("1, 2", "1, 2, 3"), 4, "x0 takes one or two values"),
        (BASE.replace("1, 2", "1, inf"), 4, "x0 must be finite"),
        (BASE + "[plot]\ncolour = red\n", 6, "unknown section [plot]"),
        (BASE.replace("paper-ex1", "sin(t"), 3, "coefficient"),
        (BASE.replace("paper-ex1", "x*t"), 3, "may only use t"),
        (BASE.replace("paper-ex1", "const-lambda"), 3, "needs a 'lambda'"),
        (BASE.replace("paper-ex1", "cubic-damped"), 3, "right-hand side"),
        (BASE + "kind = magic\n", 6, "kind must be one of"),
        (BASE + "rhs = -x\n", 6, "not both"),
        (BASE.replace("coefficient = paper-ex1", "rhs = -x"), 3, "linear-coeff needs 'coefficient'"),
        (BASE + "[box]\nn_x = 1\n", 7, "n_x must be >= 2"),
        (BASE + "[box]\nx_min = 1\nx_max = -1\n", 6, "x_min must be below x_max"),
        (BASE + "[box]\ndeadzone = 0\n", 7, "deadzone"),
        (BASE + "[shoot]\ntol = 0\n", 7, "tol"),
        (BASE + "[shoot]\nguided = maybe\n", 7, "true or false"),
        (BASE + "alpha = 0.5\n", 6, "alpha"),
        ("alpha = 1\n" + BASE, 1, "before the first"),
    ],
)
def test_rejections_are_line_precise(text, line, fragment):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line, str(info.value)
    assert str(info.value).startswith(f"line {line}: ")
    assert fragment in str(info.value)


def test_missing_pieces():
    with pytest.raises(ConfigError, match="missing \\[problem\\]"):
        parse_config("[box]\nx_min = -1\n")
    with pytest.raises(ConfigError, match="missing key 't_end'"):
        parse_config(BASE.replace("t_end = 6\n", ""))
    with pytest.raises(ConfigError, match="one of 'coefficient' or 'rhs'"):
        parse_config(BASE.replace("coefficient = paper-ex1\n", ""))


def test_bad_h_override():
    with pytest.raises(ConfigError):
        parse_config(BASE, h_override=-1.0)
    with pytest.raises(ConfigError):
        parse_config(BASE, h_override=math.nan)


def test_unreadable_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "absent.ini")
    bad = tmp_path / "bad.ini"
    bad.write_bytes(b"[problem]\nalpha = \xff\n")
    with pytest.raises(ConfigError, match="UTF-8"):
        load_config(bad)


def test_documented_example_parses():
    readme = (CONFIGS.parent / "README.md").read_text(encoding="utf-8")
    block = readme.split("```ini\n", 1)[1].split("```", 1)[0]
    cfg = parse_config(block)
    assert cfg.box == SamplingBox(-10.0, 10.0, 1e-4, 2001)
    assert cfg.shoot.target == 0.25 and cfg.lipschitz(1.0) == 2.0
