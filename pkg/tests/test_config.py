from pathlib import Path

import numpy as np
import pytest

from siegert.config import ConfigError, load_config, parse_config

from conftest import config_text

MINIMAL = """
[potential]
V0 = 0.15
Delta = 5.0
r0 = 6.0
"""


def test_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.l == 0 and cfg.N == 100 and cfg.beta == 1.0
    assert cfg.sweep.grid[0] == 0.0 and cfg.sweep.grid[-1] == 10.0 and len(cfg.sweep.grid) == 201
    assert cfg.do.band == (2, 30) and cfg.do.threshold == 0.5 and cfg.do.window is None
    assert cfg.oracle.enabled and cfg.oracle.guess == "variational"
    assert cfg.family.at(0.4).segments == ((5.0, -0.15), (6.0, 0.4))
    assert len(cfg.source_hash) == 64


def test_segment_form():
    cfg = parse_config("""
[potential]
segments = [{r_end = 2.0, value = 0.1}, {r_end = 5.0, value = -0.2}, {r_end = 6.0, value = 0.0}]
lambda_slot = 1
""")
    assert cfg.family.at(3.0).segments == ((2.0, 3.0), (5.0, -0.2), (6.0, 0.0))


def error_for(text):
    with pytest.raises(ConfigError) as info:
        parse_config(text, source="exp.toml")
    return info.value


def test_unknown_key_reports_field_and_line():
    err = error_for(MINIMAL + "[basis]\nN = 100\nbeta = 1.0\nsize = 3\n")
    assert err.field_path == "basis.size" and err.line == 9
    assert "exp.toml" in str(err) and "line 9" in str(err)


def test_type_error_in_section():
    err = error_for(MINIMAL + "[sweep]\npoints = 'many'\n")
    assert err.field_path == "sweep.points" and err.line == 7


def test_same_key_other_section_line():
    text = MINIMAL + "[sweep]\npoints = 201\n[do]\nthreshold = 5.0\n"
    err = error_for(text)
    assert err.field_path == "do.threshold" and err.line == 9


@pytest.mark.parametrize("extra,field", [
    ("[sweep]\npoints = 2\n", "sweep.points"),
    ("[sweep]\nlambda_max = -1.0\n", "sweep.lambda_max"),
    ("[basis]\nN = 5\n", "basis.N"),
    ("[basis]\nbeta = 0.0\n", "basis.beta"),
    ("[do]\nband = [0, 10]\n", "do.band"),
    ("[do]\nband = [2, 101]\n", "do.band"),
    ("[do]\nwindow = [0.01, 5.0]\n", "do.window"),
    ("[do]\nwindow = [0.0, 0.05]\n", "do.window"),
    ("[do]\nwindow = [5.0, 11.0]\n", "do.window"),
    ("[oracle]\nguess = 'telepathy'\n", "oracle.guess"),
    ("[output]\ntables = ['spectrum', 'plots']\n", "output.tables"),
    ("l = -1\n", "l"),
])
def test_validation(extra, field):
    text = extra + MINIMAL if not extra.startswith("[") else MINIMAL + extra
    assert error_for(text).field_path == field


def test_invalid_potential():
    err = error_for("[potential]\nV0 = 0.15\nDelta = 7.0\nr0 = 6.0\n")
    assert err.field_path == "potential"


def test_missing_potential():
    assert error_for("l = 0\n").field_path == "potential"


def test_toml_syntax_error_line():
    err = error_for(MINIMAL + "[basis\nN = 3\n")
    assert err.line == 6


def test_window_on_grid_accepted():
    cfg = parse_config(MINIMAL + "[do]\nwindow = [1.0, 4.0]\n")
    assert cfg.do.window == (1.0, 4.0)


def test_output_directory_resolution(tmp_path, monkeypatch):
    path = tmp_path / "exp.toml"
    path.write_text(config_text(directory="results"))
    assert load_config(path).output.directory == (tmp_path / "results").resolve()
    monkeypatch.setenv("SIEGERT_OUTPUT_DIR", str(tmp_path / "elsewhere"))
    assert load_config(path).output.directory == tmp_path / "elsewhere"


def test_unreadable_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")


def test_shipped_configs_parse():
    root = Path(__file__).resolve().parents[1] / "configs"
    files = sorted(root.glob("*.toml"))
    assert len(files) >= 4
    for f in files:
        cfg = load_config(f)
        assert np.all(np.diff(cfg.sweep.grid) > 0)
