import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
import vectors
from ecf import crypto
from ecf.crypto import ContentKey, Identity, KeyWrap
from ecf.errors import AuthenticationFailed, InvalidPoint, InvalidRecipientKey, LowOrderPoint
from ecf.memory import track_wipes, wipe
from ecf.rng import SeededRandomness

seeds = st.binary(min_size=32, max_size=32)


# -- published vectors ---------------------------------------------------------


def test_x25519_rfc7748_vector():
    assert bytes(crypto.key_agreement(vectors.X25519_SCALAR, vectors.X25519_U)) == vectors.X25519_OUT


def test_x25519_rfc7748_single_iteration():
    nine = (9).to_bytes(32, "little")
    assert bytes(crypto.key_agreement(nine, nine)) == vectors.X25519_ITER1


def test_x25519_rfc7748_diffie_hellman():
    assert crypto.x25519_public_key(vectors.DH_ALICE_PRIVATE) == vectors.DH_ALICE_PUBLIC
    assert crypto.x25519_public_key(vectors.DH_BOB_PRIVATE) == vectors.DH_BOB_PUBLIC
    assert bytes(crypto.key_agreement(vectors.DH_ALICE_PRIVATE, vectors.DH_BOB_PUBLIC)) == vectors.DH_SHARED
    assert bytes(crypto.key_agreement(vectors.DH_BOB_PRIVATE, vectors.DH_ALICE_PUBLIC)) == vectors.DH_SHARED


def test_oracle_agrees_with_rfc7748():
    assert oracles.x25519(vectors.X25519_SCALAR, vectors.X25519_U) == vectors.X25519_OUT
    assert oracles.x25519_base(vectors.DH_ALICE_PRIVATE) == vectors.DH_ALICE_PUBLIC


def test_ed25519_rfc8032_test1():
    ident = Identity(vectors.ED25519_SECRET)
    assert ident.ed25519_public_key == vectors.ED25519_PUBLIC
    assert ident.sign(b"") == vectors.ED25519_SIGNATURE
    assert crypto.verify_name(vectors.ED25519_PUBLIC, b"", vectors.ED25519_SIGNATURE)


def test_hash_known_answers():
    assert crypto.digest(1, b"") == vectors.SHA512_EMPTY
    assert crypto.digest(1, b"abc") == vectors.SHA512_ABC
    assert crypto.digest(2, b"abc") == vectors.SHA256_ABC


@pytest.mark.parametrize("key, nonce, pt, ct, tag", vectors.GCM_VECTORS)
def test_aes_gcm_vectors(key, nonce, pt, ct, tag):
    assert crypto.aead_encrypt(key, nonce, pt) == ct + tag
    assert crypto.aead_decrypt(key, nonce, ct + tag) == pt


# -- key conversion ---------------------------------------------------------------


@given(seeds)
def test_converted_keys_are_a_pair(seed):
    ident = Identity(seed)
    x_sk = crypto.ed25519_seed_to_x25519(seed)
    assert crypto.x25519_public_key(x_sk) == ident.x25519_public_key
    assert ident.x25519_public_key == oracles.ed25519_public_to_x25519(ident.ed25519_public_key)
    assert bytes(x_sk) == oracles.ed25519_seed_to_x25519(seed)


def test_conversion_known_answer():
    x = crypto.ed25519_public_to_x25519(vectors.ED25519_PUBLIC)
    assert x == oracles.ed25519_public_to_x25519(vectors.ED25519_PUBLIC)
    assert x == oracles.x25519_base(oracles.ed25519_seed_to_x25519(vectors.ED25519_SECRET))


def test_conversion_rejects_invalid_point():
    with pytest.raises(InvalidPoint):
        crypto.ed25519_public_to_x25519(bytes(32))
    with pytest.raises(ValueError):
        crypto.ed25519_public_to_x25519(bytes(31))


@given(seeds, seeds)
def test_agreement_commutes(a, b):
    ia, ib = Identity(a), Identity(b)
    assert ia.agree(ib.x25519_public_key) == ib.agree(ia.x25519_public_key)


@pytest.mark.parametrize("point", vectors.SMALL_ORDER_POINTS)
def test_small_order_points_rejected(point, alice):
    with pytest.raises(LowOrderPoint):
        alice.agree(point)
    with pytest.raises(LowOrderPoint):
        crypto.key_agreement(bytes(range(32)), point)


# -- derivations --------------------------------------------------------------------


@pytest.mark.parametrize("suite", [1, 2])
@given(shared=seeds, rx=seeds, ex=seeds)
def test_pre_key_2_matches_oracle(suite, shared, rx, ex):
    assert bytes(crypto.derive_pre_key_2(suite, shared, rx, ex)) == oracles.pre_key_2(suite, shared, rx, ex)


@pytest.mark.parametrize("suite", [1, 2])
@given(pk=seeds, salt=st.binary(min_size=16, max_size=16))
def test_tag_matches_oracle(suite, pk, salt):
    tag = crypto.compute_identification_tag(suite, pk, salt)
    assert len(tag) == 16
    assert tag == oracles.identification_tag(suite, pk, salt)


# -- wrapping ---------------------------------------------------------------------


@pytest.mark.parametrize("suite", [1, 2])
@given(seed=seeds, key=seeds)
def test_wrap_unwrap_inverse(suite, seed, key):
    ident = Identity(seed)
    ck = ContentKey(key, bytes(12))
    wrap = crypto.wrap_content_key(suite, ck, ident.ed25519_public_key)
    assert bytes(crypto.unwrap_content_key(suite, wrap, ident)) == key


def test_unwrap_by_stranger_gives_other_key(alice, bob):
    ck = ContentKey.generate()
    wrap = crypto.wrap_content_key(1, ck, alice.ed25519_public_key)
    assert crypto.unwrap_content_key(1, wrap, bob) != ck.aes_key


def test_pre_key_1_is_linear_in_content_key(alice):
    # same ephemeral key, content key differs in one bit: pre key 1 differs in that bit only
    k1 = ContentKey(bytes(32), bytes(12))
    k2 = ContentKey(b"\x01" + bytes(31), bytes(12))
    w1 = crypto.wrap_content_key(1, k1, alice.ed25519_public_key, SeededRandomness(9))
    w2 = crypto.wrap_content_key(1, k2, alice.ed25519_public_key, SeededRandomness(9))
    assert w1.ephemeral_public_key == w2.ephemeral_public_key
    assert bytes(crypto.xor_bytes(w1.aes_pre_key_1, w2.aes_pre_key_1)) == b"\x01" + bytes(31)


def test_fresh_ephemeral_changes_whole_pre_key(alice):
    ck = ContentKey(bytes(32), bytes(12))
    a = crypto.wrap_content_key(1, ck, alice.ed25519_public_key)
    b = crypto.wrap_content_key(1, ck, alice.ed25519_public_key)
    assert a.ephemeral_public_key != b.ephemeral_public_key
    differing = sum(bin(x ^ y).count("1") for x, y in zip(a.aes_pre_key_1, b.aes_pre_key_1))
    assert 64 < differing < 192


def test_wrap_rejects_bad_recipient_key():
    with pytest.raises(InvalidRecipientKey):
        crypto.wrap_content_key(1, ContentKey.generate(), bytes(32))


def test_keywrap_field_sizes():
    with pytest.raises(ValueError):
        KeyWrap(bytes(31), bytes(32))


# -- AEAD ---------------------------------------------------------------------------


@given(st.binary(max_size=2000))
def test_aead_round_trip(pt):
    key, nonce = bytes(range(32)), bytes(12)
    ct = crypto.aead_encrypt(key, nonce, pt)
    assert len(ct) == len(pt) + 16
    assert crypto.aead_decrypt(key, nonce, ct) == pt


def test_aead_any_flip_fails():
    key, nonce = bytes(range(32)), bytes(12)
    ct = crypto.aead_encrypt(key, nonce, b"attack at dawn")
    for i in range(len(ct)):
        bad = bytearray(ct)
        bad[i] ^= 0x01
        with pytest.raises(AuthenticationFailed):
            crypto.aead_decrypt(key, nonce, bytes(bad))
    with pytest.raises(AuthenticationFailed):
        crypto.aead_decrypt(key, nonce, ct[:15])
    with pytest.raises(AuthenticationFailed):
        crypto.aead_decrypt(bytes(32), nonce, ct)


def test_aead_associated_data_is_bound():
    key, nonce = bytes(range(32)), bytes(12)
    ct = crypto.aead_encrypt(key, nonce, b"x", b"header")
    assert crypto.aead_decrypt(key, nonce, ct, b"header") == b"x"
    with pytest.raises(AuthenticationFailed):
        crypto.aead_decrypt(key, nonce, ct, b"headex")


# -- signatures ---------------------------------------------------------------------


@given(st.text(min_size=1, max_size=50))
def test_name_signature(name):
    ident = Identity(bytes(32))
    raw = name.encode()
    sig = crypto.sign_name(ident, raw)
    assert crypto.verify_name(ident.ed25519_public_key, raw, sig)
    assert not crypto.verify_name(ident.ed25519_public_key, raw + b"!", sig)
    assert not crypto.verify_name(ident.ed25519_public_key, raw, sig[:-1] + bytes([sig[-1] ^ 1]))
    assert not crypto.verify_name(bytes(32), raw, sig)


# -- identities and erasure -----------------------------------------------------------


def test_identity_lifecycle():
    ident = Identity.generate(SeededRandomness(1))
    assert ident == Identity.generate(SeededRandomness(1))
    assert ident != Identity.generate(SeededRandomness(2))
    seed = ident.export_seed()
    assert Identity(seed) == ident
    wipe(seed)
    assert seed == bytearray(32)
    with ident:
        pass
    with pytest.raises(ValueError):
        ident.sign(b"x")
    with pytest.raises(ValueError):
        ident.export_seed()


def test_wipe():
    buf = bytearray(b"secret")
    with track_wipes() as counter:
        wipe(buf, None)
    assert buf == bytearray(6)
    assert (counter.count, counter.bytes) == (1, 6)
    with pytest.raises(TypeError):
        wipe(b"immutable")


def test_wrap_erases_ephemeral_secrets(alice):
    ck = ContentKey.generate()
    with track_wipes() as counter:
        crypto.wrap_content_key(1, ck, alice.ed25519_public_key)
    # ephemeral scalar, shared secret, pre key 2
    assert counter.count >= 3
    assert counter.bytes >= 96


def test_unwrap_erases_shared_secret(alice):
    wrap = crypto.wrap_content_key(2, ContentKey.generate(), alice.ed25519_public_key)
    with track_wipes() as counter:
        crypto.unwrap_content_key(2, wrap, alice)
    assert counter.count >= 2


def test_content_key_wipe():
    ck = ContentKey.generate()
    ck.wipe()
    assert ck.aes_key == bytearray(32)


def test_seeded_randomness_is_reproducible():
    a, b = SeededRandomness("x"), SeededRandomness("x")
    assert a.bytes(40) == b.bytes(40)
    assert [a.randbelow(7) for _ in range(20)] == [b.randbelow(7) for _ in range(20)]
