import json

import jsonschema
import pytest
from hypothesis import given, settings, strategies as st

from helpers import GOLDEN, setup_encrypt
from qcpabe.conjugate import agreement, decrypt
from qcpabe.dynamic import (
    FORBIDDEN,
    QUALIFIED,
    AccessStructure,
    Action,
    StampedRequest,
    add_attribute,
    apply_structure_change,
    do_reevaluate,
    du_request,
    stamp_structure,
)
from qcpabe.errors import DuplicateAttribute, FutureStamp, NonMonotoneTime, UnknownRequest
from qcpabe.policy import is_qualified, parse_policy
from qcpabe.protocol import du_decrypt, is_bottom
from qcpabe.transcript import load_schema

U = tuple("ABCDE")


def structure(policy=GOLDEN, t=0, transcript=None):
    return stamp_structure(AccessStructure.from_policy(policy, U), t, U, transcript)


def test_from_policy_tracks_minimal_and_maximal_sets():
    g = AccessStructure.from_policy(GOLDEN, U)
    assert g.qualified == {frozenset("ABE"), frozenset("CDE")}
    # maximal forbidden sets: drop E, or miss one of each pair
    assert g.forbidden == {frozenset("ABCD"), frozenset("ACE"), frozenset("ADE"), frozenset("BCE"), frozenset("BDE")}


@settings(max_examples=30)
@given(st.sets(st.sampled_from(U)))
def test_structure_status_matches_policy(attrs):
    es = structure()
    assert (es.status_at(attrs, 0) == QUALIFIED) == is_qualified(parse_policy(GOLDEN), attrs)


def test_change_restamps_only_flipped_sets():
    es = structure()
    apply_structure_change(es, AccessStructure.from_policy("C & D & E", U), 4)
    assert es.sets[frozenset("ABE")].status == FORBIDDEN and es.sets[frozenset("ABE")].stamp == 4
    assert es.sets[frozenset("CDE")].stamp == 0
    assert es.status_at("ABE", 0) == QUALIFIED and es.status_at("ABE", 4) == FORBIDDEN
    assert es.status_at("ABCDE", 4) == QUALIFIED
    with pytest.raises(NonMonotoneTime):
        apply_structure_change(es, AccessStructure.from_policy(GOLDEN, U), 4)


def test_untracked_sets_follow_tracked_qualified_subsets():
    es = stamp_structure(AccessStructure(qualified={frozenset("AB")}), 0, U)
    assert es.status_at("ABC", 0) == QUALIFIED
    assert es.status_at("AC", 0) == FORBIDDEN
    assert es.current_policy() == "A & B"


def test_monotonicity_violations_reported():
    es = stamp_structure(AccessStructure(qualified={frozenset("A")}, forbidden={frozenset("AB")}), 0, U)
    assert es.monotonicity_violations() == [(frozenset("A"), frozenset("AB"))]


def test_requests_and_attributes():
    es = structure(t=2)
    ctx, mt, _, _ = setup_encrypt(1)
    with pytest.raises(FutureStamp):
        du_request(es, mt, "ABE", 3)
    req = du_request(es, mt, "ABE", 2)
    assert req in es.requests
    add_attribute(es, "F")
    assert es.universe[-1] == "F"
    with pytest.raises(DuplicateAttribute):
        add_attribute(es, "F")
    with pytest.raises(UnknownRequest):
        do_reevaluate(es, StampedRequest(mt, frozenset("A"), 0), ctx, None)


def attach(ctx, transcript=True):
    es = structure(transcript=ctx.transcript if transcript else None)
    ctx.structure = es
    return es


def test_four_transitions():
    ctx, mt, msg, rng = setup_encrypt(11)
    es = attach(ctx)
    reqs = {s: du_request(es, mt, s, 0) for s in ("ABE", "CDE", "AC", "ACE")}
    apply_structure_change(es, AccessStructure.from_policy("(C & D & E) | (A & C & E)", U), 1, ctx.transcript)
    got = {s: do_reevaluate(es, r, ctx, rng.child(s)) for s, r in reqs.items()}
    assert got["CDE"].action is Action.NO_CHANGE
    assert got["AC"].action is Action.ASSIGN_BOTTOM and got["AC"].bottom.state is not None
    assert got["ABE"].action is Action.SCRAMBLE
    assert got["ACE"].action is Action.REENCRYPT
    # q->q keeps access because the authority releases the current pad
    assert du_decrypt(ctx, mt, "CDE", rng) == msg
    # the revoked set still rebuilds the seed but is refused the pad
    noise = du_decrypt(ctx, mt, "ABE", rng)
    assert not is_bottom(noise) and 0.3 < agreement(noise, msg) < 0.7
    assert du_decrypt(ctx, got["ACE"].new_mt, "ACE", rng) == msg
    for line in ctx.transcript.to_jsonl().splitlines():
        jsonschema.validate(json.loads(line), load_schema())


def test_scrambled_ciphertext_defeats_old_basis_key():
    ctx, mt, msg, rng = setup_encrypt(12)
    es = attach(ctx)
    req = du_request(es, mt, "ABE", 0)
    b_prime = ctx.keystream.expand(ctx.aa.entry(mt).key_B, len(msg))
    apply_structure_change(es, AccessStructure.from_policy("C & D & E", U), 1)
    assert do_reevaluate(es, req, ctx, rng).action is Action.SCRAMBLE
    scrambled = ctx.store.get(mt).ciphertext
    agree = agreement(decrypt(scrambled, b_prime, rng), msg)
    assert 0.3 < agree < 0.7


def test_repeated_scrambles_compose():
    ctx, mt, msg, rng = setup_encrypt(13)
    es = attach(ctx, transcript=False)
    r1 = du_request(es, mt, "ABE", 0)
    apply_structure_change(es, AccessStructure.from_policy("C & D & E", U), 1)
    do_reevaluate(es, r1, ctx, rng)
    r2 = du_request(es, mt, "ABE", 1)
    apply_structure_change(es, AccessStructure.from_policy("A & B & E", U), 2)
    # f->q re-encrypts; a fresh revocation of the old tag scrambles again
    assert do_reevaluate(es, r2, ctx, rng).action is Action.REENCRYPT
    r3 = du_request(es, mt, "CDE", 0)
    assert do_reevaluate(es, r3, ctx, rng).action is Action.SCRAMBLE
    apply_structure_change(es, AccessStructure.from_policy(GOLDEN, U), 3)
    assert du_decrypt(ctx, mt, "ABE", rng) == msg
