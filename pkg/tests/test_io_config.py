import io
import json
from dataclasses import replace

import pytest

from emochat import config as cfgmod, eventlog
from emochat.population import Geometric, describe
from emochat.simulator import BOT_ID, CHANNEL, ConfigError, Message, run

from conftest import default_config


def same_sim(a, b) -> bool:
    # distributions hold numpy arrays, so compare them through their parameters
    return (replace(a, dists=None) == replace(b, dists=None)
            and describe(a.dists) == describe(b.dists))


def test_log_round_trip_bit_exact():
    res = run(default_config(ticks=200, n0=120, n_targets=30, n_moderators=10))
    text = eventlog.dumps(res.log)
    back = eventlog.read_log(io.StringIO(text))
    assert back == res.log
    assert eventlog.dumps(back) == text
    assert text.splitlines()[0] == "tick\tsender\trecipient\tarousal\tvalence"


def test_endpoint_tokens():
    log = [Message(0, 3, CHANNEL, 0.5, 0.1), Message(1, BOT_ID, 3, 0.5, 0.0)]
    text = eventlog.dumps(log)
    assert "\tchannel\t" in text and "\nbot\t" in text.replace("1\tbot", "\nbot")
    assert eventlog.read_log(io.StringIO(text)) == log


@pytest.mark.parametrize("body, msg", [
    ("0\t1\t2\t0.5\n", "5 fields"),
    ("0\tchannel\t2\t0.5\t0.1\n", "cannot send"),
    ("0\t1\t2\t1.5\t0.1\n", "out of range"),
    ("3\t1\t2\t0.5\t0.1\n1\t1\t2\t0.5\t0.1\n", "backwards"),
    ("0\tx\t2\t0.5\t0.1\n", "bad endpoint"),
])
def test_malformed_logs(body, msg):
    with pytest.raises(eventlog.LogFormatError, match=msg):
        eventlog.read_log(io.StringIO("tick\tsender\trecipient\tarousal\tvalence\n" + body))
    with pytest.raises(eventlog.LogFormatError, match="header"):
        eventlog.read_log(io.StringIO("a\tb\n"))


def test_defaults_mirror_library():
    rc = cfgmod.from_dict({})
    assert same_sim(rc.sim, default_config())
    assert rc.corrnet["c0"] == 0.4


def test_unknown_key_names_its_path():
    with pytest.raises(ConfigError, match=r"map\.gama: unknown key"):
        cfgmod.from_dict({"map": {"gama": 0.1}})
    with pytest.raises(ConfigError, match=r"^colour: unknown key"):
        cfgmod.from_dict({"colour": 1})


@pytest.mark.parametrize("given, key", [
    ({"sim": {"ticks": "many"}}, "sim.ticks"),
    ({"sim": {"seed": True}}, "sim.seed"),
    ({"corrnet": {"c0": 1.2}}, "corrnet.c0"),
    ({"analysis": {"detrend_window": 100}}, "analysis.detrend_window"),
    ({"population": {"g": {"name": "nope"}}}, "population.g"),
])
def test_invalid_values(given, key):
    with pytest.raises(ConfigError, match=key.replace(".", r"\.")):
        cfgmod.from_dict(given)


def test_toml_and_json_load_agree(tmp_path):
    (tmp_path / "d.tsv").write_text("2 0.5\n4 0.5\n")
    toml = """
out = "runs/x"
[sim]
ticks = 100
[map]
gamma = 0.08
[population]
delay_moderator = {name = "tabulated", file = "d.tsv"}
"""
    (tmp_path / "c.toml").write_text(toml)
    a = cfgmod.load(tmp_path / "c.toml")
    assert a.sim.ticks == 100 and a.sim.map.gamma == 0.08
    assert a.raw["population"]["delay_moderator"]["file"] == str(tmp_path / "d.tsv")
    (tmp_path / "c.json").write_text(json.dumps(a.to_dict()))
    b = cfgmod.load(tmp_path / "c.json")
    assert same_sim(b.sim, a.sim)
    c = cfgmod.from_dict(cfgmod.parse_text(cfgmod.to_toml(a.to_dict()), "toml"))
    assert same_sim(c.sim, a.sim)


def test_manifest_is_a_config():
    rc = cfgmod.from_dict({"sim": {"seed": 7}})
    m = {"format": cfgmod.MANIFEST_FORMAT, "config": rc.to_dict(), "files": {}}
    assert same_sim(cfgmod.from_dict(m).sim, rc.sim)


def test_overrides():
    rc = cfgmod.with_overrides(cfgmod.from_dict({}), **{"sim.seed": 9, "bot.profile": "negative",
                                                        "sim.ticks": None})
    assert rc.sim.seed == 9 and rc.sim.bot.profile == "negative" and rc.sim.ticks == 5000


def test_distribution_tables_replaced_wholesale():
    rc = cfgmod.from_dict({"population": {"delay_moderator": {"name": "geometric", "mean": 2.0}}})
    assert rc.sim.dists.delay_moderator == Geometric(2.0)
