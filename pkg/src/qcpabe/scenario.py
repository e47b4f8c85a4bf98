"""Scenario files driving a complete protocol run.

Format (``#`` starts a comment, blank lines are ignored)::

    qcpabe-scenario v1
    mode: semi                      # semi | full
    m: 8
    attributes: A B C D E
    policy: ((A & B) | (C & D)) & E
    message: 0123456789abcdef       # hex, at most 2^m bits
    channel: ideal                  # ideal | eve
    seed: 42
    du: A B E                       # one line per data user
    du: A C
    event: 1 policy (A & B) | E     # structure change at time 1
    event: 2 add F                  # new attribute at time 2

Events are applied in order after every data user has made one request at
time 0; afterwards each request is re-evaluated against the final state.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .bb84 import ChannelModel
from .conjugate import hex_to_bits
from .errors import PolicySyntaxError, QcpabeError, ThresholdOutOfRange
from .policy import leaves, parse_policy

SCENARIO_HEADER = "qcpabe-scenario v1"
_CHANNELS = {"ideal": ChannelModel.IDEAL, "eve": ChannelModel.INTERCEPT_RESEND}


class ScenarioError(QcpabeError, ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class DynamicEvent:
    t: int
    action: str  # "policy" | "add"
    argument: str


@dataclass
class Scenario:
    mode: str
    m: int
    attributes: list[str]
    policy: str
    message_hex: str
    channel: ChannelModel
    seed: int
    du_attribute_sets: list[list[str]] = field(default_factory=list)
    dynamic_events: list[DynamicEvent] = field(default_factory=list)

    @property
    def message_bits(self) -> str:
        return hex_to_bits(self.message_hex)


def _split_attrs(text: str) -> list[str]:
    return [a for a in text.replace(",", " ").split() if a]


def parse_scenario(text: str) -> Scenario:
    lines = text.splitlines()
    if not lines or lines[0].strip() != SCENARIO_HEADER:
        raise ScenarioError(1, f"expected header {SCENARIO_HEADER!r}")
    values: dict[str, tuple[int, str]] = {}
    dus: list[list[str]] = []
    events: list[DynamicEvent] = []
    event_lines: list[int] = []
    for no, raw in enumerate(lines[1:], start=2):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        key, value = key.strip(), value.strip()
        if not sep:
            raise ScenarioError(no, f"expected 'key: value', got {line!r}")
        if key == "du":
            dus.append(_split_attrs(value))
        elif key == "event":
            parts = value.split(None, 2)
            if len(parts) != 3 or not parts[0].isdigit() or parts[1] not in ("policy", "add"):
                raise ScenarioError(no, "event must read '<time> policy <text>' or '<time> add <attr>'")
            events.append(DynamicEvent(int(parts[0]), parts[1], parts[2]))
            event_lines.append(no)
        elif key in ("mode", "m", "attributes", "policy", "message", "channel", "seed"):
            if key in values:
                raise ScenarioError(no, f"duplicate key {key!r}")
            values[key] = (no, value)
        else:
            raise ScenarioError(no, f"unknown key {key!r}")

    end = len(lines)
    for key in ("mode", "m", "attributes", "policy", "message", "seed"):
        if key not in values:
            raise ScenarioError(end, f"missing required key {key!r}")

    def get(key):
        return values[key]

    no, mode = get("mode")
    if mode not in ("semi", "full"):
        raise ScenarioError(no, f"mode must be semi or full, got {mode!r}")
    no, m_text = get("m")
    if not m_text.isdigit():
        raise ScenarioError(no, f"m must be a positive integer, got {m_text!r}")
    m = int(m_text)
    no, attr_text = get("attributes")
    attributes = _split_attrs(attr_text)
    if not attributes or len(set(attributes)) != len(attributes):
        raise ScenarioError(no, "attributes must be a non-empty list of unique names")
    no, policy = get("policy")
    try:
        tree = parse_policy(policy)
    except (PolicySyntaxError, ThresholdOutOfRange) as exc:
        raise ScenarioError(no, f"policy: {exc}") from None
    unknown = set(leaves(tree)) - set(attributes)
    if unknown:
        raise ScenarioError(no, f"policy uses unknown attributes {sorted(unknown)}")
    no, message = get("message")
    try:
        bits = hex_to_bits(message)
    except ValueError:
        raise ScenarioError(no, "message must be a hex string") from None
    if not bits or len(bits) > 2**m:
        raise ScenarioError(no, f"message must hold 1..2^{m} bits, got {len(bits)}")
    channel = ChannelModel.IDEAL
    if "channel" in values:
        no, ch = get("channel")
        if ch not in _CHANNELS:
            raise ScenarioError(no, f"channel must be ideal or eve, got {ch!r}")
        channel = _CHANNELS[ch]
    no, seed_text = get("seed")
    try:
        seed = int(seed_text, 0)
    except ValueError:
        raise ScenarioError(no, f"seed must be an integer, got {seed_text!r}") from None
    if not 0 <= seed < 2**64:
        raise ScenarioError(no, "seed must fit in 64 bits")
    last = 0
    for ev, no in zip(events, event_lines):
        if ev.t <= last:
            raise ScenarioError(no, "event times must be strictly increasing and positive")
        if ev.action == "policy":
            try:
                parse_policy(ev.argument)
            except (PolicySyntaxError, ThresholdOutOfRange) as exc:
                raise ScenarioError(no, f"event policy: {exc}") from None
        last = ev.t
    return Scenario(mode, m, attributes, policy, message.strip(), channel, seed, dus, events)


def load_scenario(path: str | Path) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))
