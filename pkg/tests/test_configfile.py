import pytest

from v2vchan.configfile import ConfigError, dump_config, load_config, parse_config
from v2vchan.synth import passing_scenario

BASE = """\
tx_speed = 5.0
rx_speed = 8.0     # m/s
lane_offset = 3
passing_time = 2
duration = 4
carrier_frequency = 60e9
"""


def test_minimal_config():
    cfg = parse_config(BASE)
    assert cfg.carrier_frequency == 60e9
    assert cfg.scatterers == ()
    assert cfg.num_snapshots == 32000


def test_missing_key_named():
    text = BASE.replace("carrier_frequency = 60e9\n", "")
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == "carrier_frequency"
    assert "carrier_frequency" in str(info.value)


@pytest.mark.parametrize("extra, key, line", [
    ("noise_floor = loud\n", "noise_floor", 7),
    ("colour = red\n", "colour", 7),
    ("just words\n", None, 7),
    ("tx_speed = 1\n", "tx_speed", 7),
    ("scatterer.0.x = 1\nscatterer.0.w = 2\n", "scatterer.0.w", 8),
    ("scatterer_layout = forest\n", "scatterer_layout", 7),
])
def test_errors_name_key_and_line(extra, key, line):
    with pytest.raises(ConfigError) as info:
        parse_config(BASE + extra)
    assert info.value.key == key
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_layouts_and_explicit_scatterers():
    cfg = parse_config(BASE + "scatterer_layout = roadside\n"
                       "scatterer.0.x = 1\nscatterer.0.y = 9\nscatterer.0.z = 2\n"
                       "scatterer.0.reflection_loss = 4\nscatterer.0.active_start = 1.5\n")
    assert len(cfg.scatterers) == 45
    extra = cfg.scatterers[-1]
    assert extra.position == (1.0, 9.0, 2.0)
    assert extra.reflection_loss == 4.0
    assert extra.active_interval == (1.5, float("inf"))
    diffuse = parse_config(BASE + "scatterer_layout = diffuse\ndiffuse_count = 12\n")
    assert len(diffuse.scatterers) == 12


def test_incomplete_scatterer_group():
    with pytest.raises(ConfigError) as info:
        parse_config(BASE + "scatterer.3.x = 1\nscatterer.3.y = 2\n")
    assert info.value.key == "scatterer.3.z"


def test_invariant_violation_is_config_error():
    with pytest.raises(ConfigError):
        parse_config(BASE + "noise_floor = 0\n")


def test_booleans_and_options():
    cfg = parse_config(BASE + "add_noise = off\nantenna_beamwidth = 30\ndelay_kernel = dirichlet\n")
    assert cfg.add_noise is False
    assert cfg.antenna_beamwidth == 30.0
    assert cfg.delay_kernel == "dirichlet"


def test_dump_round_trip(tmp_path):
    cfg = passing_scenario(rng_seed=5, add_noise=False, antenna_beamwidth=40.0)
    path = tmp_path / "s.cfg"
    path.write_text(dump_config(cfg))
    assert load_config(path) == cfg
