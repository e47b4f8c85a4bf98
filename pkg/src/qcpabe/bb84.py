"""BB84 key agreement between the data owner and the attribute authority."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import BB84Aborted, InsufficientSiftedBits
from .quantum import Basis, RandomSource, measure, prepare


class ChannelModel(enum.Enum):
    IDEAL = "ideal"
    INTERCEPT_RESEND = "eve"


@dataclass(frozen=True)
class BB84Config:
    target_m: int
    raw_count: int
    check_fraction: float = 0.5
    qber_abort_threshold: float = 0.11

    def __post_init__(self):
        if self.target_m < 1:
            raise ValueError("target_m must be positive")
        if not 0 < self.check_fraction < 1:
            raise ValueError("check_fraction must lie strictly between 0 and 1")
        if not 0 <= self.qber_abort_threshold < 1:
            raise ValueError("qber_abort_threshold must lie in [0, 1)")
        if self.raw_count < self.min_raw_count(self.target_m, self.check_fraction):
            raise ValueError(
                f"raw_count {self.raw_count} below the expected-yield guard "
                f"{self.min_raw_count(self.target_m, self.check_fraction)}"
            )

    @staticmethod
    def min_raw_count(target_m: int, check_fraction: float) -> int:
        return math.ceil(4 * target_m / (1 - check_fraction) - 1e-9)

    @classmethod
    def for_key(cls, target_m: int, check_fraction: float = 0.5, **kw) -> "BB84Config":
        return cls(target_m, cls.min_raw_count(target_m, check_fraction), check_fraction, **kw)


@dataclass(frozen=True)
class PhotonRecord:
    sender_bit: int
    sender_basis: Basis
    receiver_basis: Basis
    receiver_bit: int
    role: str  # "discarded" | "checked" | "key" | "spare"


@dataclass(frozen=True)
class BB84Result:
    key_B: str
    key_receiver: str
    qber: float
    aborted: bool
    sifted_count: int
    checked_count: int
    transcript: tuple[PhotonRecord, ...]


def _single_run(config: BB84Config, channel: ChannelModel, rng: RandomSource) -> BB84Result:
    n = config.raw_count
    sender_bits = rng.bits(n)
    sender_bases = rng.bits(n)
    photons = [prepare(b, Basis(a)) for b, a in zip(sender_bits, sender_bases)]

    if channel is ChannelModel.INTERCEPT_RESEND:
        eve_bases = rng.bits(n)
        intercepted = []
        for q, e in zip(photons, eve_bases):
            bit, _ = measure(q, Basis(e), rng)
            intercepted.append(prepare(bit, Basis(e)))
        photons = intercepted

    receiver_bases = rng.bits(n)
    receiver_bits = [measure(q, Basis(r), rng)[0] for q, r in zip(photons, receiver_bases)]

    # Public discussion: bases are announced, matching positions are kept.
    sifted = [i for i in range(n) if sender_bases[i] == receiver_bases[i]]
    n_check = max(1, round(config.check_fraction * len(sifted))) if sifted else 0
    order = rng.permutation(len(sifted))
    checked = {sifted[j] for j in order[:n_check]}
    errors = sum(sender_bits[i] != receiver_bits[i] for i in checked)
    qber = errors / n_check if n_check else 0.0

    remaining = [i for i in sifted if i not in checked]
    key_pos = set(remaining[: config.target_m])
    roles = []
    for i in range(n):
        if i in checked:
            roles.append("checked")
        elif i in key_pos:
            roles.append("key")
        elif sender_bases[i] == receiver_bases[i]:
            roles.append("spare")
        else:
            roles.append("discarded")
    transcript = tuple(
        PhotonRecord(sender_bits[i], Basis(sender_bases[i]), Basis(receiver_bases[i]), receiver_bits[i], roles[i])
        for i in range(n)
    )
    aborted = qber > config.qber_abort_threshold
    key_idx = remaining[: config.target_m]
    return BB84Result(
        key_B="".join(str(sender_bits[i]) for i in key_idx),
        key_receiver="".join(str(receiver_bits[i]) for i in key_idx),
        qber=qber,
        aborted=aborted,
        sifted_count=len(sifted),
        checked_count=n_check,
        transcript=transcript,
    )


def run_bb84(config: BB84Config, channel: ChannelModel, rng: RandomSource) -> BB84Result:
    """Run one BB84 exchange and return the agreed m-bit string.

    Raises BB84Aborted when the check-bit error rate exceeds the threshold
    (the partial result rides on the exception) and InsufficientSiftedBits
    when too few sifted positions remain for the key.
    An all-zero key is discarded and the exchange repeated.
    """
    while True:
        result = _single_run(config, channel, rng)
        if result.aborted:
            raise BB84Aborted(result.qber, result)
        if len(result.key_B) < config.target_m:
            raise InsufficientSiftedBits(
                f"{len(result.key_B)} key bits left after sifting, {config.target_m} required"
            )
        if "1" in result.key_B:
            return result
