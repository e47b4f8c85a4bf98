"""The four-party flows: data owner (DO), attribute authority (AA),
data user (DU) and cloud service provider (CSP).

``semi`` shares the BB84 seed with a classical LSSS; ``full`` encodes each
seed bit as a CSS logical qubit and hands out individual qubits as shares.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .bb84 import BB84Config, BB84Result, ChannelModel, run_bb84
from .conjugate import _bits, decrypt, encrypt
from .css import CssCode, ShareRegistry, encode_logical, qualified_sets, steane_default
from .errors import (
    BundleAuthenticationError,
    CodeLengthMismatch,
    InsufficientSiftedBits,
    MessageTooLong,
    NotFound,
    NotQualified,
    UnknownAttribute,
    UnknownTag,
)
from .keystream import Keystream, LfsrKeystream
from .lsss import FieldPrime, Share, build_lsss, generate_shares, reconstruct_secret, reconstruction_vector
from .policy import leaves, parse_policy
from .quantum import RandomSource, StateVector, prepare
from .store import CipherRecord, CloudStore, MessageTag, ShareRecord
from .transcript import Transcript

MSK_BYTES = 32
_NONCE_BYTES = 12
_BB84_RETRIES = 4

SEMI = "semi"
FULL = "full"


@dataclass(frozen=True)
class Bottom:
    """The failure symbol handed to an unauthorized data user.

    ``state`` optionally carries the random qubit |⊥> assigned on revocation.
    """

    state: StateVector | None = None

    def __bool__(self):
        return False


BOTTOM = Bottom()


def is_bottom(value) -> bool:
    return isinstance(value, Bottom)


@dataclass
class AAEntry:
    """What the authority keeps per message tag; never leaves the AA."""

    key_B: str
    policy: str
    state_ids: list[int] = field(default_factory=list)


class AttributeAuthority:
    def __init__(self, rng: RandomSource):
        self.rng = rng
        self._msk = rng.bytes(MSK_BYTES)
        self.entries: dict[MessageTag, AAEntry] = {}
        self.registry = ShareRegistry()
        self.pads: dict[MessageTag, tuple[list[int], list[int]]] = {}

    def entry(self, mt: MessageTag) -> AAEntry:
        try:
            return self.entries[mt]
        except KeyError:
            raise UnknownTag(f"authority holds no key material for {mt}") from None

    def wrap(self, mt: MessageTag, bundle: dict) -> bytes:
        """Authenticated encryption of a share bundle under msk, bound to mt."""
        nonce = self.rng.bytes(_NONCE_BYTES)
        data = json.dumps(bundle, sort_keys=True).encode()
        return nonce + AESGCM(self._msk).encrypt(nonce, data, mt.key.encode())

    def unwrap(self, mt: MessageTag, es: bytes) -> dict:
        nonce, body = es[:_NONCE_BYTES], es[_NONCE_BYTES:]
        try:
            data = AESGCM(self._msk).decrypt(nonce, body, mt.key.encode())
        except InvalidTag:
            raise BundleAuthenticationError(f"wrapped bundle for {mt} failed authentication") from None
        return json.loads(data)


@dataclass
class SystemContext:
    universe: tuple[str, ...]
    m: int
    mode: str
    field: FieldPrime
    aa: AttributeAuthority
    store: CloudStore
    keystream: Keystream
    code: CssCode | None = None
    channel: ChannelModel = ChannelModel.IDEAL
    check_fraction: float = 0.5
    qber_abort_threshold: float = 0.11
    transcript: Transcript = field(default_factory=Transcript)
    owner_messages: dict[MessageTag, str] = field(default_factory=dict)
    structure: object | None = None  # dynamic.EvolvingStructure when attached
    basis_convention: dict[int, str] = field(default_factory=lambda: {0: "Z", 1: "X"})

    def position(self, attr: str) -> int:
        return self.universe.index(attr) + 1

    def bb84_config(self, scale: int = 1) -> BB84Config:
        base = BB84Config.min_raw_count(self.m, self.check_fraction)
        return BB84Config(self.m, base * scale, self.check_fraction, self.qber_abort_threshold)


def system_setup(
    attribute_universe: Sequence[str],
    m: int,
    rng: RandomSource,
    mode: str = SEMI,
    code: CssCode | None = None,
    store: CloudStore | None = None,
    keystream: Keystream | None = None,
    channel: ChannelModel = ChannelModel.IDEAL,
    **bb84_options,
) -> SystemContext:
    universe = tuple(attribute_universe)
    if not universe:
        raise ValueError("the attribute universe is empty")
    if len(set(universe)) != len(universe):
        raise ValueError("attribute names must be unique")
    if mode not in (SEMI, FULL):
        raise ValueError(f"mode must be {SEMI!r} or {FULL!r}")
    if 2 * m > MSK_BYTES * 8:
        raise ValueError(f"m={m} needs a {2 * m}-bit wrapping key; at most {MSK_BYTES * 8} supported")
    if mode == FULL:
        code = code or steane_default()
        if code.n != len(universe):
            raise CodeLengthMismatch(f"code length {code.n} differs from {len(universe)} attributes")
    ctx = SystemContext(
        universe=universe,
        m=m,
        mode=mode,
        field=FieldPrime.for_bits(m),
        aa=AttributeAuthority(rng.child("aa")),
        store=store if store is not None else CloudStore(),
        keystream=keystream or LfsrKeystream.for_bits(m),
        code=code if mode == FULL else None,
        channel=channel,
        **bb84_options,
    )
    ctx.bb84_config()  # validates the BB84 options early
    return ctx


def _agree_seed(ctx: SystemContext, rng: RandomSource, channel: ChannelModel, do_id: str) -> BB84Result:
    for attempt in range(_BB84_RETRIES):
        config = ctx.bb84_config(scale=2**attempt)
        ctx.transcript.message(do_id, "AA", "bb84_photons", {"count": config.raw_count, "attempt": attempt})
        try:
            result = run_bb84(config, channel, rng)
        except InsufficientSiftedBits:
            continue
        finally:
            ctx.transcript.message("AA", do_id, "bb84_public_discussion", {"attempt": attempt})
        return result
    raise InsufficientSiftedBits(f"BB84 yielded too few key bits after {_BB84_RETRIES} attempts")


def do_encrypt(
    ctx: SystemContext,
    message: str | Sequence[int],
    policy_text: str,
    rng: RandomSource,
    do_id: str = "DO",
    channel: ChannelModel | None = None,
) -> MessageTag:
    bits = "".join(map(str, _bits(message)))
    if not bits:
        raise ValueError("empty message")
    if len(bits) > 2**ctx.m:
        raise MessageTooLong(f"{len(bits)}-bit message exceeds 2^{ctx.m}")
    policy = parse_policy(policy_text)
    unknown = set(leaves(policy)) - set(ctx.universe)
    if unknown:
        raise UnknownAttribute(f"policy names attributes outside the universe: {sorted(unknown)}")

    result = _agree_seed(ctx, rng, channel or ctx.channel, do_id)
    mt = MessageTag(do_id, ctx.transcript.now)
    ctx.transcript.message("AA", do_id, "message_tag", {"mt": mt.key})

    b_prime = ctx.keystream.expand(result.key_B, len(bits))
    ciphertext = encrypt(bits, b_prime)
    ctx.store.put(CipherRecord(mt, ciphertext, policy_text if ctx.mode == SEMI else None))
    ctx.transcript.message(do_id, "CSP", "store_ciphertext", {"mt": mt.key, "length": len(bits)})
    ctx.transcript.message(do_id, "AA", "access_policy", {"mt": mt.key, "policy": policy_text})

    ctx.aa.entries[mt] = AAEntry(result.key_receiver, policy_text)
    ctx.owner_messages[mt] = bits
    return mt


def seed_to_int(bits: str) -> int:
    """Big-endian: the first BB84 key bit is the most significant."""
    return int(bits, 2)


def int_to_seed(value: int, m: int) -> str:
    return format(value, f"0{m}b")


def aa_keygen_semi(ctx: SystemContext, mt: MessageTag) -> ShareRecord:
    entry = ctx.aa.entry(mt)
    secret = seed_to_int(entry.key_B)
    mat = build_lsss(parse_policy(entry.policy), ctx.field)
    shares = generate_shares(mat, secret, ctx.aa.rng)
    bundle = {"kind": SEMI, "shares": {a: [] for a in ctx.universe}}
    for s in shares:
        bundle["shares"][s.attr].append([s.row_index, s.value])
    record = ShareRecord(mt, ctx.aa.wrap(mt, bundle))
    ctx.store.put(record)
    ctx.transcript.message("AA", "CSP", "store_shares", {"mt": mt.key, "size": len(record.es)})
    return record


def aa_keygen_full(ctx: SystemContext, mt: MessageTag) -> ShareRecord:
    if ctx.mode != FULL:
        raise ValueError("fully-quantum key generation needs a full-mode context")
    entry = ctx.aa.entry(mt)
    states = []
    for i, b in enumerate(entry.key_B, start=1):
        sid = ctx.aa.registry.register(encode_logical(ctx.code, int(b)))
        entry.state_ids.append(sid)
        states.append(
            {"index": i, "handles": {a: [sid, ctx.position(a)] for a in ctx.universe}}
        )
    record = ShareRecord(mt, ctx.aa.wrap(mt, {"kind": FULL, "states": states}))
    ctx.store.put(record)
    ctx.transcript.message("AA", "CSP", "store_shares", {"mt": mt.key, "size": len(record.es)})
    return record


def aa_keygen(ctx: SystemContext, mt: MessageTag) -> ShareRecord:
    return aa_keygen_full(ctx, mt) if ctx.mode == FULL else aa_keygen_semi(ctx, mt)


def select_positions(code: CssCode, positions: Iterable[int]) -> tuple[int, ...] | None:
    """Lexicographically first minimal qualified set inside ``positions``."""
    held = set(positions)
    candidates = [q.sorted() for q in qualified_sets(code) if q.minimal and q.positions <= held]
    return min(candidates) if candidates else None


def _fetch(ctx: SystemContext, mt: MessageTag, kind: str):
    try:
        return ctx.store.get(mt, kind)
    except NotFound as exc:
        raise UnknownTag(str(exc)) from None


def du_decrypt(
    ctx: SystemContext, mt: MessageTag, al: Iterable[str], rng: RandomSource, du_id: str = "DU"
) -> str | Bottom:
    """Decrypt the message stored under ``mt`` with attribute list ``al``.

    Returns the message bits, or BOTTOM when ``al`` is not authorized.
    """
    al = frozenset(al)
    record: CipherRecord = _fetch(ctx, mt, "cipher")
    ctx.transcript.message(du_id, "CSP", "fetch_ciphertext", {"mt": mt.key})
    ctx.transcript.message(du_id, "AA", "key_request", {"mt": mt.key, "al": sorted(al)})
    share_record: ShareRecord = _fetch(ctx, mt, "share")
    ctx.transcript.message("AA", "CSP", "fetch_shares", {"mt": mt.key})
    bundle = ctx.aa.unwrap(mt, share_record.es)

    if ctx.mode == SEMI:
        seed = _semi_seed(ctx, mt, record, bundle, al, rng, du_id)
    else:
        seed = _full_seed(ctx, mt, bundle, al, rng, du_id)
    if seed is None:
        return BOTTOM

    ciphertext = record.ciphertext
    pad = _release_pad(ctx, mt, al, du_id)
    if pad is not None:
        ciphertext = ciphertext.scrambled(*pad)
    b_prime = ctx.keystream.expand(seed, ciphertext.length)
    return decrypt(ciphertext, b_prime, rng)


def _semi_seed(ctx, mt, record, bundle, al, rng, du_id) -> str | None:
    granted = [
        Share(attr, row, value)
        for attr in sorted(al)
        for row, value in bundle["shares"].get(attr, [])
    ]
    ctx.transcript.message("AA", du_id, "attribute_key", {"mt": mt.key, "shares": len(granted)})
    # The DU reads the policy from the ciphertext record.
    mat = build_lsss(parse_policy(record.policy or ctx.aa.entry(mt).policy), ctx.field)
    try:
        vector = reconstruction_vector(mat, al)
    except NotQualified:
        return None
    secret = reconstruct_secret(granted, vector)
    if secret >= 2**ctx.m:
        return None
    return int_to_seed(secret, ctx.m)


def _full_seed(ctx, mt, bundle, al, rng, du_id) -> str | None:
    held = [ctx.position(a) for a in al if a in ctx.universe]
    chosen = select_positions(ctx.code, held)
    if chosen is None:
        ctx.transcript.message("AA", du_id, "bottom", {"mt": mt.key})
        return None
    by_pos = {ctx.position(a): a for a in ctx.universe}
    grants = []
    for entry in bundle["states"]:
        handles = [entry["handles"][by_pos[p]] for p in chosen]
        sid = handles[0][0]
        grants.append(ctx.aa.registry.grant(sid, [pos for _, pos in handles]))
    ctx.transcript.message(
        "AA", du_id, "attribute_key", {"mt": mt.key, "positions": list(chosen), "states": len(grants)}
    )
    return "".join(str(g.reconstruct(ctx.code, rng)) for g in grants)


def _release_pad(ctx: SystemContext, mt: MessageTag, al: frozenset, du_id: str):
    """The current one-time pad for a re-randomized ciphertext, if the DU may have it."""
    pad = ctx.aa.pads.get(mt)
    if pad is None:
        return None
    structure = ctx.structure
    if structure is not None and structure.status_at(al, structure.clock) != "q":
        return None
    ctx.transcript.message("AA", du_id, "pad_key", {"mt": mt.key})
    return pad


def scramble_ciphertext(ctx: SystemContext, mt: MessageTag, rng: RandomSource) -> None:
    """Apply a fresh Pauli one-time pad to every stored ciphertext qubit.

    The accumulated pad is kept by the authority only.
    """
    record: CipherRecord = _fetch(ctx, mt, "cipher")
    n = record.ciphertext.length
    x, z = rng.bits(n), rng.bits(n)
    ctx.store.replace(CipherRecord(mt, record.ciphertext.scrambled(x, z), record.policy))
    old = ctx.aa.pads.get(mt, ([0] * n, [0] * n))
    # Pauli masks compose by XOR up to a global phase.
    ctx.aa.pads[mt] = ([a ^ b for a, b in zip(old[0], x)], [a ^ b for a, b in zip(old[1], z)])
    ctx.transcript.message(mt.do_id, "CSP", "rerandomize_ciphertext", {"mt": mt.key})
    ctx.transcript.message(mt.do_id, "AA", "pad_key", {"mt": mt.key})


def bottom_state(rng: RandomSource) -> Bottom:
    """|⊥>: one of the four conjugate states, chosen uniformly."""
    return Bottom(prepare(rng.bit(), rng.bit()))
