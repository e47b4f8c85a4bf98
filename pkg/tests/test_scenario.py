from pathlib import Path

import pytest

from qcpabe.bb84 import ChannelModel
from qcpabe.runner import BOTTOM, CONSUMED, SUCCESS, run_scenario
from qcpabe.scenario import ScenarioError, load_scenario, parse_scenario

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

BASE = """qcpabe-scenario v1
mode: semi
m: 8
attributes: A B C D E
policy: ((A & B) | (C & D)) & E
message: ff00
seed: 3
du: A B E
"""


def test_parse_basic():
    sc = parse_scenario(BASE + "channel: eve\nevent: 2 add F\n")
    assert sc.mode == "semi" and sc.m == 8 and sc.attributes == list("ABCDE")
    assert sc.message_bits == "1111111100000000"
    assert sc.channel is ChannelModel.INTERCEPT_RESEND
    assert sc.du_attribute_sets == [list("ABE")]
    assert sc.dynamic_events[0].action == "add"


@pytest.mark.parametrize(
    "text, line",
    [
        ("nope\n", 1),
        (BASE.replace("mode: semi", "mode: odd"), 2),
        (BASE.replace("m: 8", "m: x"), 3),
        (BASE.replace("A B C D E", "A A"), 4),
        (BASE.replace("& E", "& & E"), 5),
        (BASE.replace("& E", "& Z"), 5),
        (BASE.replace("ff00", "xyz"), 6),
        (BASE.replace("seed: 3", "seed: -1"), 7),
        (BASE + "bogus: 1\n", 9),
        (BASE + "no colon\n", 9),
        (BASE + "mode: full\n", 9),
        (BASE + "event: 2 policy A\nevent: 1 policy B\n", 10),
        (BASE + "event: 1 policy A &\n", 9),
        (BASE + "event: x policy A\n", 9),
        (BASE.replace("message: ff00\n", ""), 7),  # missing keys point at the last line
    ],
)
def test_errors_point_at_lines(text, line):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(text)
    assert info.value.line == line


def test_shipped_scenarios_run():
    semi = run_scenario(load_scenario(SCENARIOS / "semi_revocation.txt"))
    outcomes = [(o.du_id, o.phase, o.outcome, o.action) for o in semi.outcomes]
    assert outcomes == [
        ("DU1", "initial", SUCCESS, None),
        ("DU2", "initial", SUCCESS, None),
        ("DU3", "initial", BOTTOM, None),
        ("DU1", "after-events", BOTTOM, "scramble"),
        ("DU2", "after-events", SUCCESS, "no_change"),
        ("DU3", "after-events", SUCCESS, "reencrypt"),
    ]
    full = run_scenario(load_scenario(SCENARIOS / "full_steane.txt"))
    assert [o.outcome for o in full.outcomes] == [SUCCESS, BOTTOM]


def test_full_mode_shares_are_single_use():
    text = BASE.replace("mode: semi", "mode: full").replace("A B C D E", "A B C D E F G") + "du: B D F\n"
    assert [o.outcome for o in run_scenario(parse_scenario(text)).outcomes] == [SUCCESS, CONSUMED]


def test_adding_an_attribute_keeps_access():
    res = run_scenario(parse_scenario(BASE + "event: 1 add F\n"))
    assert [o.outcome for o in res.outcomes] == [SUCCESS, SUCCESS]
    assert res.structure.universe[-1] == "F"


def test_runs_are_reproducible():
    sc = load_scenario(SCENARIOS / "semi_revocation.txt")
    assert run_scenario(sc).transcript_jsonl() == run_scenario(sc).transcript_jsonl()
