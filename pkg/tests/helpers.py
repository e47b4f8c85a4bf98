from qcpabe.protocol import aa_keygen, do_encrypt, system_setup
from qcpabe.quantum import RandomSource

SEMI_ATTRS = list("ABCDE")
FULL_ATTRS = list("ABCDEFG")
GOLDEN = "((A & B) | (C & D)) & E"


def random_message(rng: RandomSource, n: int = 256) -> str:
    return "".join(map(str, rng.bits(n)))


def setup_encrypt(seed, mode="semi", policy=GOLDEN, n=256, **kw):
    """Build a context, encrypt a random message and store its key shares."""
    rng = RandomSource(seed)
    attrs = SEMI_ATTRS if mode == "semi" else FULL_ATTRS
    ctx = system_setup(attrs, 8, rng.child("setup"), mode=mode, **kw)
    msg = random_message(rng.child("msg"), n)
    mt = do_encrypt(ctx, msg, policy, rng.child("do"))
    aa_keygen(ctx, mt)
    return ctx, mt, msg, rng
