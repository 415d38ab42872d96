import pytest

from cvsuperpose.config import RunConfig, load_run_config, parse_grid, read_config_file
from cvsuperpose.fock_core import TruncationPolicy


@pytest.mark.parametrize("spec, expected", [("101", (101, 101)), ("51x101", (51, 101)), ("3X4", (3, 4))])
def test_parse_grid(spec, expected):
    assert parse_grid(spec) == expected


def test_parse_grid_rejects_garbage():
    with pytest.raises(ValueError):
        parse_grid("3x4x5")


def test_flags_override_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# sweep settings\nn_max=40\nquad_order=24\ngrid=9x7\n")
    config = load_run_config(str(path), n_max=50, grid=None)
    assert config.n_max == 50
    assert config.quadrature_order == 24
    assert (config.grid_s, config.grid_r) == (9, 7)


def test_environment_default():
    assert RunConfig().quadrature_order >= 2


def test_unknown_file_key(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("colour=blue\n")
    with pytest.raises(ValueError):
        read_config_file(str(path))


def test_missing_file():
    with pytest.raises(ValueError):
        read_config_file("/nonexistent/run.cfg")


def test_auto_grow_parsed(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("auto_grow=false\n")
    assert read_config_file(str(path)) == {"auto_grow": False}


@pytest.mark.parametrize("flags", [{"n_max": 1}, {"tail_tol": 0.0}, {"grid": "1x5"}, {"workers": 0}, {"s_max": -1.0}])
def test_invalid_settings(flags):
    with pytest.raises(ValueError):
        load_run_config(**flags)


def test_unknown_flag():
    with pytest.raises(ValueError):
        load_run_config(colour="blue")


def test_policy_from_config(config):
    policy = config.policy()
    assert isinstance(policy, TruncationPolicy)
    assert policy.n_max == config.n_max


def test_out_dir_created(config):
    path = config.ensure_out_dir()
    assert path.is_dir()
