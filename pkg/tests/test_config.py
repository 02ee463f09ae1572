import numpy as np
import pytest

from hfmoments.config import DEFAULTS, ConfigError, load_config, parse_grid
from hfmoments.fixtures import data_path


def test_defaults():
    cfg = load_config()
    assert cfg.fcidump == "fixture:h2"
    assert cfg.methods == ("B", "C", "D", "E")
    assert len(cfg.grid) == 24
    assert cfg.mode == "analytic"
    assert cfg.energy_shift == "hf"


def test_print_defaults_reparses():
    assert load_config(text=DEFAULTS).config_hash() == load_config().config_hash()


def test_hash_ignores_comments_and_layout():
    a = load_config(text="[noise]\nq = 0.1\n")
    b = load_config(text="; a comment\n[noise]\n# another\nq   =   0.1\n")
    c = load_config(text="[noise]\nq = 0.2\n")
    assert a.config_hash() == b.config_hash() != c.config_hash()


def test_relative_paths_resolve_against_config(tmp_path):
    (tmp_path / "sys").mkdir()
    (tmp_path / "sys" / "m.fcidump").write_text(data_path("h2.fcidump").read_text())
    (tmp_path / "sys" / "m.dipole").write_text(data_path("h2.dipole").read_text())
    path = tmp_path / "run.ini"
    path.write_text("[system]\nfcidump = sys/m.fcidump\ndipole = sys/m.dipole\n")
    cfg = load_config(path)
    mi, _ = cfg.load_integrals()
    assert mi.n_orb == 2
    assert cfg.source == str(path)


def test_overrides():
    cfg = load_config(text="[noise]\nseed = 3\n", overrides={"noise.seed": "9"})
    assert cfg.noise_seed == 9


@pytest.mark.parametrize("text, match", [
    ("[bogus]\nx = 1\n", "unknown section"),
    ("[noise]\nqq = 1\n", "unknown key"),
    ("[noise]\nq = 1.0\n", "outside"),
    ("[noise]\nq = -0.1\n", "outside"),
    ("[noise]\nq = lots\n", "cannot read"),
    ("[noise]\nshots = -5\n", "shots"),
    ("[noise]\nresamples = 1\n", "resamples"),
    ("[noise]\nenabled = maybe\n", "true/false"),
    ("[system]\nfrozen_core = 0\nmoment_frozen = 0\n", "frozen both"),
    ("[system]\nfrozen_core = 0 0\n", "twice"),
    ("[system]\nmoment_frozen = -1\n", "negative"),
    ("[system]\nmoment_frozen = 1\nmoment_frozen_occupation = 2\n", "moment_frozen_occupation"),
    ("[system]\nfcidump = missing.fcidump\n", "file not found"),
    ("[system]\nfcidump = fixture:nope\n", "unknown fixture"),
    ("[ansatz]\nmode = guess\n", "mode"),
    ("[ansatz]\nmode = fixed\n", "thetas"),
    ("[scan]\nmethods = B F\n", "methods"),
    ("[scan]\nmethods = B B\n", "methods"),
    ("[scan]\ngrid = 0.1 0.01\n", "increasing"),
    ("not a config", "no section"),
])
def test_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        load_config(text=text)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "absent.ini")


def test_parse_grid():
    np.testing.assert_allclose(parse_grid("log 1e-3 1e-1 3"), [1e-3, 1e-2, 1e-1])
    np.testing.assert_allclose(parse_grid("0.01, 0.02 0.05"), [0.01, 0.02, 0.05])
    for bad in ("", "log 1 2", "0 0.1", "log -1 1 3", "0.1 nan", "a b"):
        with pytest.raises(ConfigError):
            parse_grid(bad)


def test_orbital_indices_are_given_before_core_freezing():
    cfg = load_config(text="[system]\nfcidump = fixture:water\ndipole = fixture:water\n"
                           "frozen_core = 0\nmoment_frozen = 1 4\n")
    problem = cfg.build_problem()
    assert problem.n_qubits == 8 and problem.n_elec == 4
    with pytest.raises(ConfigError, match="outside"):
        load_config(text="[system]\nmoment_frozen = 5\n").build_problem()
