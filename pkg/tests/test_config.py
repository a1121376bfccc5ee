import pytest

from opiniond.config import RunConfig, dump_config, parse_config
from opiniond.errors import ConfigError

MINIMAL = """
total_steps = 1000

[params]
n = 100
k_avg = 6
d = 0.25
w = 0.5
p = 0.1
"""


def test_minimal_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.params.mu == 0.5
    assert cfg.bins == 20
    assert cfg.rewire_probe_limit == 50
    assert cfg.mutation_target == "independent"
    assert cfg.snapshot_schedule == (0, 1000)
    assert cfg.params.initial.kind == cfg.params.basal.kind == "uniform"


def test_out_of_range():
    with pytest.raises(ConfigError, match=r"d must be in \(0,1\]"):
        parse_config(MINIMAL.replace("d = 0.25", "d = 1.5"))


def test_round_trip():
    text = MINIMAL.replace("p = 0.1", 'p = 0.1\n[params.basal]\nkind = "powerlaw"\ngamma = 2.5\n')
    text = "seed = 18446744073709551615\nruns = 3\nsnapshot_schedule = [0, 10, 1000]\n" + text
    cfg = parse_config(text)
    assert parse_config(dump_config(cfg)) == cfg
    assert dump_config(parse_config(dump_config(cfg))) == dump_config(cfg)


@pytest.mark.parametrize("text,where", [
    ("colour = 1\n" + MINIMAL, "top level"),
    (MINIMAL.replace("p = 0.1", "p = 0.1\nmuu = 0.3"), "[params]"),
    (MINIMAL + "[params.basal]\nkind = \"uniform\"\nxmin = 0.1\n", "params.basal"),
])
def test_unknown_keys(text, where):
    with pytest.raises(ConfigError, match="unknown key") as exc:
        parse_config(text)
    assert where in str(exc.value)


def test_parse_error_has_position():
    with pytest.raises(ConfigError, match=r"line 3, column"):
        parse_config("total_steps = 5\n\n[params\n")


@pytest.mark.parametrize("edit", [
    lambda t: t.replace("total_steps = 1000", "total_steps = 1000\nsnapshot_schedule = [0, 2000]"),
    lambda t: t.replace("total_steps = 1000", "total_steps = 1000\nsnapshot_schedule = [10]"),
    lambda t: t.replace("total_steps = 1000", "total_steps = 1000\nbins = 1"),
    lambda t: t.replace("total_steps = 1000", "total_steps = 1000\nseed = -1"),
    lambda t: t.replace("total_steps = 1000", "total_steps = 1000\nmutation_target = \"both\""),
    lambda t: t.replace("n = 100", "n = \"many\""),
    lambda t: t.replace("d = 0.25\n", ""),
    lambda t: t.replace("p = 0.1", "p = 0.1\n[params.initial]\nkind = \"powerlaw\"\ngamma = 0.5"),
])
def test_semantic_errors(edit):
    with pytest.raises(ConfigError):
        parse_config(edit(MINIMAL))


def test_integer_accepted_for_float():
    assert parse_config(MINIMAL.replace("d = 0.25", "d = 1")).params.d == 1.0


def test_with_overrides_ignores_none():
    cfg = parse_config(MINIMAL)
    assert cfg.with_overrides(seed=None, bins=30) == RunConfig(cfg.params, 1000, (0, 1000), bins=30)
