import pytest

from icnsim.model import MS, SEC, Prefix
from icnsim.scenario import (
    BUNDLED,
    Scenario,
    ScenarioError,
    bundled_scenario,
    load_scenario,
    parse_duration,
    render_duration,
)
from icnsim.simulator import ConfigError, validate_config


def test_duration_units():
    assert parse_duration("10ms", 1, "x") == 10 * MS
    assert parse_duration("2s", 1, "x") == 2 * SEC
    assert parse_duration("500us", 1, "x") == 500_000
    assert parse_duration("7ns", 1, "x") == 7
    assert render_duration(10 * MS) == "10ms"
    assert render_duration(2 * SEC) == "2s"
    assert render_duration(1_000_500_000) == "1000500us"


def test_duration_requires_unit():
    with pytest.raises(ScenarioError, match="line 3: dur: .*unit"):
        parse_duration("10", 3, "dur")


def test_bundled_scenarios_parse_and_validate():
    for name in BUNDLED:
        scenario = bundled_scenario(name)
        assert scenario.name == name
        validate_config(scenario.to_run_config())


def test_unknown_bundled_name():
    with pytest.raises(ConfigError):
        bundled_scenario("fig9")


def test_round_trip_every_bundled_scenario():
    for name in BUNDLED:
        scenario = bundled_scenario(name)
        assert Scenario.parse(scenario.render()) == scenario


MINIMAL = """\
[run]
scenario mini
strategy sifah
duration 100ms
seed 1
mil 50ms

[nodes]
r0 router
cons consumer
prod producer

[links]
cons r0 1ms 0.0
r0 prod 5ms 0.0

[fib]
r0 /c prod 1 1

[consumers]
cons rate=10.0 prefixes=/c:1.0

[producers]
prod prefixes=/c payload=8
"""


def test_minimal_scenario_runs():
    from icnsim.simulator import run

    scenario = Scenario.parse(MINIMAL)
    result = run(scenario.to_run_config())
    assert result.metrics.ndo_deliveries > 0


@pytest.mark.parametrize(
    "needle, replacement, match",
    [
        ("[fib]", "[fibs]", r"line 17: section: unknown section 'fibs'"),
        ("r0 /c prod 1 1", "r0 /c prod 1", r"line 18: fib: expected"),
        ("duration 100ms", "duration 100", r"line 4: duration: .*unit"),
        ("seed 1", "seed one", r"line 5: seed: bad integer"),
        ("strategy sifah", "strategy rip", r"line 3: strategy: unknown strategy"),
        ("cons r0 1ms 0.0", "cons r0 1ms zero", r"line 14: loss: bad number"),
        ("rate=10.0", "rate=10.0 rate=9", r"line 21: rate: duplicate key"),
        ("rate=10.0", "pace=10.0", r"line 21: pace: unknown consumer key"),
        ("prefixes=/c:1.0", "prefixes=/c", r"line 21: prefixes: expected prefix:weight"),
        ("r0 router", "r0 hub", r"line 9: role: unknown role"),
        ("prefixes=/c payload=8", "prefixes=/c payload=8 ttl=9", r"line 24: ttl: unknown producer key"),
        ("mil 50ms", "mil 50ms\nretries 3", r"line 7: retries: unknown run key"),
    ],
)
def test_parse_errors_name_line_and_field(needle, replacement, match):
    text = MINIMAL.replace(needle, replacement)
    with pytest.raises(ScenarioError, match=match):
        Scenario.parse(text)


def test_missing_required_run_key():
    text = MINIMAL.replace("seed 1\n", "")
    with pytest.raises(ScenarioError, match="seed: missing"):
        Scenario.parse(text)


def test_load_scenario_uses_file_stem(tmp_path):
    path = tmp_path / "custom.txt"
    path.write_text(MINIMAL.replace("scenario mini\n", ""))
    assert load_scenario(path).name == "custom"


def test_loop_fraction_reweights_consumers():
    scenario = bundled_scenario("grid16")
    config = scenario.to_run_config(loop_fraction=0.2)
    for spec in config.consumers:
        weights = dict(spec.prefixes)
        assert weights[Prefix.parse("/prefix2")] == 0.2
        assert abs(sum(weights.values()) - 1.0) < 1e-12
    assert config.loop_fraction == 0.2


def test_loop_fraction_requires_sweep_section():
    scenario = Scenario.parse(MINIMAL)
    with pytest.raises(ConfigError, match="no sweep"):
        scenario.to_run_config(loop_fraction=0.5)


def test_overrides_apply():
    scenario = bundled_scenario("fig2_sifah")
    config = scenario.to_run_config(strategy="ccn", seed=99, duration=2 * SEC, mil=100 * MS)
    assert config.strategy == "ccn"
    assert config.seed == 99
    assert config.duration == 2 * SEC
    assert config.mil == 100 * MS
