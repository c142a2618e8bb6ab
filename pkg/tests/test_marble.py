import pytest
from hypothesis import given, strategies as st

from simonforge.attacks import lu_forge
from simonforge.blocks import BlockString
from simonforge.ciphers import IdentityCipher
from simonforge.copa import AeOutput, InvalidTag
from simonforge.gf2poly import field_for
from simonforge.marble import (MarbleInstance, MarbleState, MarbleVersion, TauProfile,
                               UnsupportedProfileError, ad_mask, marble_constants,
                               marble_decrypt, marble_encrypt_and_tag, marble_init,
                               marble_process_block, marble_s1, marble_verify, trans)

N = 16


def stub(n=N, **kw):
    return MarbleInstance(IdentityCipher(n, "E1"), IdentityCipher(n, "E2"),
                          IdentityCipher(n, "E3"), **kw)


def test_trans_examples():
    f = field_for(N)
    assert trans(f, 0, 0x1234) == (0x1234, 0x1234)
    assert trans(f, 0x1234, 0) == (0x1234, f.times3(0x1234))


def test_constants():
    assert marble_constants(16) == (0, 0x0101, 0x0202)
    assert marble_constants(12) == (0, 0x010, 0x020)


def test_init_identity_stub():
    inst = stub()
    c0, c1, c2 = inst.consts
    assert marble_init(inst) == MarbleState(c1 ^ c0, c2)


def test_init_known_answer():
    inst = MarbleInstance.from_key(0x1234, N)
    st1 = marble_init(inst)
    assert (st1.s1, st1.s2) == (0x63F3, 0x0202)
    assert inst.L == 0x31C7
    assert marble_init(MarbleInstance.from_key(0x1234, N)) == st1


def test_process_block_identity():
    inst = stub()
    out, new = marble_process_block(inst, MarbleState(0, 0), 0xBEEF, 0)
    assert out == 0xBEEF
    assert new == MarbleState(0xBEEF, inst.field.times3(0xBEEF))


def test_s1_closed_form():
    inst = MarbleInstance.from_key(0x5151, N)
    f, L, E1 = inst.field, inst.L, inst.e1.encrypt
    c0, c1, _ = inst.consts
    ad = BlockString((0x11, 0x22))
    msg = BlockString((0x1234, 0x5678, 0x9ABC))
    sigma = 0x1234 ^ 0x5678 ^ 0x9ABC
    want = c1 ^ E1(c0)
    want ^= E1(0x11 ^ f.mask_const(L, 0, 2)) ^ E1(0x22 ^ f.mask_const(L, 1, 3))
    for i, m in enumerate(msg.blocks):
        want ^= E1(m ^ f.pow2mul(L, i + 1))
    want ^= E1(sigma ^ f.mask_const(L, 3, 0, 1))
    assert marble_s1(inst, ad, msg) == want


def test_ad_masks_by_version():
    for v, partial_last in ((MarbleVersion.V1_0, (0, 4)), (MarbleVersion.V1_1, (2, 2)),
                            (MarbleVersion.V1_2, (3, 3))):
        inst = MarbleInstance.from_key(3, N, version=v)
        assert ad_mask(inst, 0, 2, False) == inst.mask(0, 2)
        assert ad_mask(inst, 1, 2, False) == inst.mask(1, partial_last[0] or 3)
        assert ad_mask(inst, 1, 2, True) == inst.mask(1, partial_last[1])


def test_tau_profiles():
    zero = MarbleInstance.from_key(9, N)
    sec = MarbleInstance.from_key(9, N, tau_profile=TauProfile.RANDOM_SECRET)
    assert zero.tau == 0
    assert sec.tau == sec.e3.encrypt(sec.consts[1])
    msg = BlockString((1, 2))
    assert marble_encrypt_and_tag(zero, None, msg).tag != marble_encrypt_and_tag(sec, None, msg).tag


@pytest.mark.parametrize("n", [16, 128])
def test_tag_period(n, rng):
    for key in range(10):
        inst = MarbleInstance.from_key(key + 1, n)
        sig = int.from_bytes(rng.bytes(16), "big") % (1 << n)
        s = sig ^ inst.field.mul(inst.L, 6)
        for _ in range(20):
            x = int.from_bytes(rng.bytes(16), "big") % (1 << n)
            a = marble_encrypt_and_tag(inst, None, BlockString((x, x ^ sig))).tag
            b = marble_encrypt_and_tag(inst, None, BlockString((x ^ s, x ^ s ^ sig))).tag
            assert a == b


@pytest.mark.parametrize("d", [1, 2, 3])
def test_lu_forgery(d, rng):
    inst = MarbleInstance.from_key(0xACE, N)
    msg = BlockString(tuple(int(v) for v in rng.integers(0, 1 << N, size=d)))
    forgery = lu_forge(inst, msg, inst.L)
    assert forgery.verified
    assert marble_verify(inst, None, msg, forgery.predicted_tag)


def test_lu_forgery_full_width():
    inst = MarbleInstance.from_key(0x0F0E0D0C0B0A09080706050403020100, 128)
    f = lu_forge(inst, BlockString((5, 6, 7)), inst.L)
    assert f.verified


def test_lu_forgery_secret_profile():
    inst = MarbleInstance.from_key(1, N, tau_profile=TauProfile.RANDOM_SECRET)
    with pytest.raises(UnsupportedProfileError):
        lu_forge(inst, BlockString((1,)), inst.L)


def test_partial_message_rejected():
    inst = MarbleInstance.from_key(1, N)
    with pytest.raises(ValueError):
        marble_encrypt_and_tag(inst, None, BlockString((1,), 4))
    with pytest.raises(ValueError):
        marble_encrypt_and_tag(inst, None, BlockString())


@given(st.integers(0, 2 ** 16 - 1), st.lists(st.integers(0, 2 ** 16 - 1), min_size=1, max_size=4),
       st.lists(st.integers(0, 2 ** 16 - 1), max_size=3), st.sampled_from(list(MarbleVersion)),
       st.sampled_from(list(TauProfile)))
def test_roundtrip_property(key, blocks, ad, version, tau):
    inst = MarbleInstance.from_key(key, N, version, tau)
    msg, adb = BlockString(tuple(blocks)), BlockString(tuple(ad))
    out = marble_encrypt_and_tag(inst, adb, msg)
    assert marble_verify(inst, adb, msg, out.tag)
    assert marble_decrypt(inst, adb, out) == msg
    with pytest.raises(InvalidTag):
        marble_decrypt(inst, adb, AeOutput(out.ciphertext, out.tag ^ 1))
