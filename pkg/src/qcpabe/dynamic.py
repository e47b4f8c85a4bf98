"""Time-stamped access structures and the owner's reaction to their changes.

The authority tracks explicit attribute sets, each with a status ``q``
(qualified) or ``f`` (forbidden) and the logical time it took that status.
A set that is not tracked is qualified at time t exactly when some tracked
set that was qualified at t is contained in it.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable

from .errors import DuplicateAttribute, FutureStamp, NonMonotoneTime, UnknownRequest
from .policy import Leaf, PolicyNode, Threshold, disjunctive_policy, is_qualified, minimal_qualified_sets, parse_policy
from .protocol import (
    Bottom,
    SystemContext,
    aa_keygen,
    bottom_state,
    do_encrypt,
    scramble_ciphertext,
)
from .quantum import RandomSource
from .store import MessageTag
from .transcript import Transcript

QUALIFIED = "q"
FORBIDDEN = "f"

AttrSet = frozenset[str]


@dataclass(frozen=True)
class AccessStructure:
    """A plain (untimed) access structure.

    ``qualified`` and ``forbidden`` list the explicitly tracked sets; when a
    policy is attached it decides the status of any other set.
    """

    qualified: frozenset[AttrSet] = frozenset()
    forbidden: frozenset[AttrSet] = frozenset()
    policy_text: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "qualified", frozenset(frozenset(s) for s in self.qualified))
        object.__setattr__(self, "forbidden", frozenset(frozenset(s) for s in self.forbidden))
        if self.qualified & self.forbidden:
            raise ValueError("a set can not be both qualified and forbidden")

    @classmethod
    def from_policy(cls, policy_text: str, universe: Iterable[str]) -> "AccessStructure":
        """Track the minimal qualified and maximal forbidden sets of a policy."""
        policy = parse_policy(policy_text)
        universe = sorted(set(universe))
        qualified = minimal_qualified_sets(policy, universe)
        complements = minimal_qualified_sets(_dual(policy), universe)
        forbidden = [frozenset(universe) - c for c in complements]
        return cls(frozenset(qualified), frozenset(forbidden), policy_text)

    @property
    def policy(self) -> PolicyNode | None:
        return parse_policy(self.policy_text) if self.policy_text else None

    def tracked(self) -> frozenset[AttrSet]:
        return self.qualified | self.forbidden

    def classify(self, attrs: Iterable[str]) -> str | None:
        attrs = frozenset(attrs)
        if attrs in self.qualified:
            return QUALIFIED
        if attrs in self.forbidden:
            return FORBIDDEN
        if self.policy_text:
            return QUALIFIED if is_qualified(self.policy, attrs) else FORBIDDEN
        return None


def _dual(policy: PolicyNode) -> PolicyNode:
    """Threshold-tree dual: S satisfies it iff the complement of S is forbidden."""
    if isinstance(policy, Leaf):
        return policy
    k = len(policy.children)
    return Threshold(k - policy.t + 1, tuple(_dual(c) for c in policy.children))


@dataclass(frozen=True)
class TimedSet:
    attrs: AttrSet
    status: str
    stamp: int


@dataclass(frozen=True)
class StructureChange:
    attrs: AttrSet
    old: str | None
    new: str
    stamp: int


@dataclass(frozen=True)
class StampedRequest:
    mt: MessageTag
    al: AttrSet
    stamp: int


@dataclass
class EvolvingStructure:
    """Owned by the authority; mutated in place by the procedures below."""

    universe: tuple[str, ...]
    clock: int
    sets: dict[AttrSet, TimedSet] = field(default_factory=dict)
    history: dict[AttrSet, list[TimedSet]] = field(default_factory=dict)
    changes: list[StructureChange] = field(default_factory=list)
    requests: list[StampedRequest] = field(default_factory=list)
    policy_text: str | None = None

    def _record(self, ts: TimedSet, old: str | None) -> None:
        self.sets[ts.attrs] = ts
        self.history.setdefault(ts.attrs, []).append(ts)
        self.changes.append(StructureChange(ts.attrs, old, ts.status, ts.stamp))

    def status_at(self, attrs: Iterable[str], t: int) -> str:
        attrs = frozenset(attrs)

        def tracked_status(s: AttrSet) -> str | None:
            entries = [ts for ts in self.history.get(s, []) if ts.stamp <= t]
            return entries[-1].status if entries else None

        own = tracked_status(attrs)
        if own is not None:
            return own
        for s in self.history:
            if s <= attrs and tracked_status(s) == QUALIFIED:
                return QUALIFIED
        return FORBIDDEN

    def qualified_sets(self) -> list[AttrSet]:
        return sorted(
            (s for s, ts in self.sets.items() if ts.status == QUALIFIED),
            key=lambda s: (len(s), sorted(s)),
        )

    def current_policy(self) -> str:
        """Policy text realizing the current structure, for re-encryption."""
        if self.policy_text:
            return self.policy_text
        return disjunctive_policy(self.qualified_sets())

    def monotonicity_violations(self) -> list[tuple[AttrSet, AttrSet]]:
        """Pairs (qualified set, forbidden superset) in the current state."""
        q = [s for s, ts in self.sets.items() if ts.status == QUALIFIED]
        f = [s for s, ts in self.sets.items() if ts.status == FORBIDDEN]
        return sorted(
            ((a, b) for a in q for b in f if a <= b),
            key=lambda pair: (sorted(pair[0]), sorted(pair[1])),
        )


def stamp_structure(
    gamma: AccessStructure,
    t: int,
    universe: Iterable[str] | None = None,
    transcript: Transcript | None = None,
) -> EvolvingStructure:
    """Attach time ``t`` to every tracked set of ``gamma``."""
    if universe is None:
        universe = sorted(set().union(*gamma.tracked())) if gamma.tracked() else []
    es = EvolvingStructure(tuple(universe), t, policy_text=gamma.policy_text)
    for attrs in sorted(gamma.tracked(), key=lambda s: (len(s), sorted(s))):
        es._record(TimedSet(attrs, gamma.classify(attrs), t), None)
    if transcript is not None:
        _publish(es, transcript, 0)
    return es


def _publish(es: EvolvingStructure, transcript: Transcript, first: int) -> None:
    for ch in es.changes[first:]:
        transcript.structure_change(ch.attrs, ch.old, ch.new, ch.stamp)


def apply_structure_change(
    es: EvolvingStructure, gamma_new: AccessStructure, t_new: int, transcript: Transcript | None = None
) -> EvolvingStructure:
    """Move to ``gamma_new`` at time ``t_new``.

    Sets whose status flips are re-stamped; unchanged sets keep their stamp;
    sets new in ``gamma_new`` are added at ``t_new``.  Tracked sets that
    ``gamma_new`` does not classify keep their status.
    """
    if t_new <= es.clock:
        raise NonMonotoneTime(f"structure time {t_new} does not follow {es.clock}")
    first = len(es.changes)
    for attrs in sorted(es.sets, key=lambda s: (len(s), sorted(s))):
        current = es.sets[attrs]
        new = gamma_new.classify(attrs)
        if new is not None and new != current.status:
            es._record(TimedSet(attrs, new, t_new), current.status)
    for attrs in sorted(gamma_new.tracked() - set(es.sets), key=lambda s: (len(s), sorted(s))):
        es._record(TimedSet(attrs, gamma_new.classify(attrs), t_new), None)
    es.policy_text = gamma_new.policy_text
    es.clock = t_new
    if transcript is not None:
        _publish(es, transcript, first)
    return es


def add_attribute(es: EvolvingStructure, attr: str) -> EvolvingStructure:
    if attr in es.universe:
        raise DuplicateAttribute(f"attribute {attr!r} already in the universe")
    es.universe = es.universe + (attr,)
    return es


def du_request(es: EvolvingStructure, mt: MessageTag, al: Iterable[str], t: int) -> StampedRequest:
    if t > es.clock:
        raise FutureStamp(f"request stamp {t} is ahead of the structure clock {es.clock}")
    req = StampedRequest(mt, frozenset(al), t)
    es.requests.append(req)
    return req


class Action(enum.Enum):
    NO_CHANGE = "no_change"
    ASSIGN_BOTTOM = "assign_bottom"
    SCRAMBLE = "scramble"
    REENCRYPT = "reencrypt"


@dataclass(frozen=True)
class Reevaluation:
    action: Action
    was: str
    now: str
    bottom: Bottom | None = None
    new_mt: MessageTag | None = None


def do_reevaluate(
    es: EvolvingStructure, request: StampedRequest, ctx: SystemContext, rng: RandomSource
) -> Reevaluation:
    """Compare a request's status at its stamp with the current status and react."""
    if request not in es.requests:
        raise UnknownRequest(f"no request recorded for {request}")
    if request.stamp >= es.clock:
        raise ValueError("only requests stamped before the current time are re-evaluated")
    was = es.status_at(request.al, request.stamp)
    now = es.status_at(request.al, es.clock)
    if now == QUALIFIED and was == QUALIFIED:
        return Reevaluation(Action.NO_CHANGE, was, now)
    if now == FORBIDDEN and was == FORBIDDEN:
        return Reevaluation(Action.ASSIGN_BOTTOM, was, now, bottom=bottom_state(rng))
    if now == FORBIDDEN:
        scramble_ciphertext(ctx, request.mt, rng)
        return Reevaluation(Action.SCRAMBLE, was, now, bottom=bottom_state(rng))
    message = ctx.owner_messages[request.mt]
    new_mt = do_encrypt(ctx, message, es.current_policy(), rng, do_id=request.mt.do_id)
    aa_keygen(ctx, new_mt)
    return Reevaluation(Action.REENCRYPT, was, now, new_mt=new_mt)
