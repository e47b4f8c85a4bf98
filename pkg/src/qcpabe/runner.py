"""Execute a parsed scenario: setup, encryption, key generation, requests,
dynamic events and re-evaluation."""
from __future__ import annotations

from dataclasses import dataclass, field

from .css import qualified_sets
from .dynamic import (
    AccessStructure,
    Action,
    EvolvingStructure,
    add_attribute,
    apply_structure_change,
    do_reevaluate,
    du_request,
    stamp_structure,
)
from .errors import CodeLengthMismatch, SharesConsumed
from .policy import disjunctive_policy
from .protocol import FULL, SystemContext, aa_keygen, do_encrypt, du_decrypt, is_bottom, system_setup
from .quantum import RandomSource
from .scenario import Scenario
from .store import CloudStore, MessageTag

SUCCESS = "SUCCESS"
BOTTOM = "BOTTOM"
MISMATCH = "MISMATCH"
CONSUMED = "CONSUMED"


@dataclass(frozen=True)
class DuOutcome:
    du_id: str
    attributes: tuple[str, ...]
    phase: str  # "initial" or "after-events"
    outcome: str
    action: str | None = None
    mt: str | None = None


@dataclass
class RunResult:
    ctx: SystemContext
    mt: MessageTag
    structure: EvolvingStructure
    outcomes: list[DuOutcome] = field(default_factory=list)

    def transcript_jsonl(self) -> str:
        return self.ctx.transcript.to_jsonl()


def initial_structure(ctx: SystemContext, policy_text: str) -> AccessStructure:
    if ctx.mode == FULL:
        names = {ctx.position(a): a for a in ctx.universe}
        minimal = [frozenset(names[p] for p in q.positions) for q in qualified_sets(ctx.code) if q.minimal]
        return AccessStructure(frozenset(minimal), frozenset(), disjunctive_policy(minimal))
    return AccessStructure.from_policy(policy_text, ctx.universe)


def _attempt(ctx, mt, al, rng, du_id, message) -> str:
    try:
        result = du_decrypt(ctx, mt, al, rng, du_id=du_id)
    except SharesConsumed:
        return CONSUMED
    if is_bottom(result):
        return BOTTOM
    return SUCCESS if result == message else MISMATCH


def run_scenario(sc: Scenario, store: CloudStore | None = None) -> RunResult:
    root = RandomSource(sc.seed)
    ctx = system_setup(sc.attributes, sc.m, root.child("setup"), mode=sc.mode, store=store, channel=sc.channel)
    message = sc.message_bits
    mt = do_encrypt(ctx, message, sc.policy, root.child("do"))
    aa_keygen(ctx, mt)

    es = stamp_structure(initial_structure(ctx, sc.policy), 0, ctx.universe, ctx.transcript)
    ctx.structure = es
    result = RunResult(ctx, mt, es)

    requests = []
    for k, al in enumerate(sc.du_attribute_sets, start=1):
        du_id = f"DU{k}"
        requests.append((du_id, du_request(es, mt, al, es.clock)))
        outcome = _attempt(ctx, mt, al, root.child(du_id), du_id, message)
        result.outcomes.append(DuOutcome(du_id, tuple(al), "initial", outcome, mt=mt.key))

    if not sc.dynamic_events:
        return result
    for ev in sc.dynamic_events:
        if ev.action == "add":
            if ctx.mode == FULL:
                raise CodeLengthMismatch("full mode can not grow the attribute universe past the code length")
            add_attribute(es, ev.argument)
            ctx.universe = ctx.universe + (ev.argument,)
            # Shares and matrices are untouched; the structure clock still advances.
            apply_structure_change(es, AccessStructure(policy_text=es.policy_text), ev.t, ctx.transcript)
        else:
            gamma = AccessStructure.from_policy(ev.argument, es.universe)
            apply_structure_change(es, gamma, ev.t, ctx.transcript)

    rng = root.child("reevaluate")
    actions = [(du_id, req, do_reevaluate(es, req, ctx, rng)) for du_id, req in requests]
    for du_id, req, ev in actions:
        du_rng = root.child(f"{du_id}-after")
        if ev.action is Action.NO_CHANGE:
            outcome = _attempt(ctx, req.mt, req.al, du_rng, du_id, message)
            target = req.mt
        elif ev.action is Action.REENCRYPT:
            outcome = _attempt(ctx, ev.new_mt, req.al, du_rng, du_id, message)
            target = ev.new_mt
        else:
            outcome, target = BOTTOM, req.mt
        result.outcomes.append(
            DuOutcome(du_id, tuple(sorted(req.al)), "after-events", outcome, ev.action.value, target.key)
        )
    return result
