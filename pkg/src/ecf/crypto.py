"""Cryptographic primitives and the container key derivation.

Primitive sources:

* SHA-512 / SHA-256 from :mod:`hashlib`
* X25519, Ed25519 and AES-256-GCM from ``cryptography`` (OpenSSL)
* the Ed25519 -> X25519 birational map from libsodium via PyNaCl

Secret intermediates are held in ``bytearray`` buffers and wiped with
:func:`ecf.memory.wipe` once released. Only constant-time library primitives
touch secret data; nothing in this module branches on secret values except the
low-order check on the shared secret, which libsodium and OpenSSL also do.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass

import nacl.bindings
import nacl.exceptions
from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey
from cryptography.hazmat.primitives.asymmetric.x25519 import X25519PrivateKey, X25519PublicKey
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from ecf import rng as _rng
from ecf.errors import (
    AuthenticationFailed,
    InvalidPoint,
    InvalidRecipientKey,
    LowOrderPoint,
)
from ecf.format import GCM_TAG_LENGTH, IDENTIFICATION_TAG_LENGTH, NONCE_LENGTH, SALT_LENGTH
from ecf.memory import wipe
from ecf.suites import CipherSuite, get_suite

AES_KEY_LENGTH = 32
X25519_KEY_LENGTH = 32
PRE_KEY_LENGTH = 32

_HASHLIB_NAMES = {"SHA-512": "sha512", "SHA-256": "sha256"}


def _need(name: str, value: bytes | bytearray, n: int) -> None:
    if len(value) != n:
        raise ValueError(f"{name} must be {n} bytes, got {len(value)}")


def _hasher(suite: CipherSuite | int):
    return hashlib.new(_HASHLIB_NAMES[get_suite(suite).hash_name])


def digest(suite: CipherSuite | int, data: bytes) -> bytes:
    """The suite's hash of ``data`` (64 bytes for suite 1, 32 for suite 2)."""
    h = _hasher(suite)
    h.update(data)
    return h.digest()


def xor_bytes(a: bytes | bytearray, b: bytes | bytearray) -> bytearray:
    if len(a) != len(b):
        raise ValueError("XOR operands differ in length")
    return bytearray(x ^ y for x, y in zip(a, b))


# -- key conversion and agreement ---------------------------------------------


def ed25519_public_to_x25519(public_key: bytes) -> bytes:
    """Map an Ed25519 public key to its X25519 (Montgomery u) counterpart."""
    _need("Ed25519 public key", public_key, 32)
    try:
        return nacl.bindings.crypto_sign_ed25519_pk_to_curve25519(bytes(public_key))
    except nacl.exceptions.CryptoError:
        # libsodium refuses points off the curve and small-order points
        raise InvalidPoint("Ed25519 public key is not a valid prime-order point") from None


def ed25519_seed_to_x25519(seed: bytes | bytearray) -> bytearray:
    """X25519 private scalar for an Ed25519 seed: clamped SHA-512(seed)[:32]."""
    _need("Ed25519 seed", seed, 32)
    sk = bytearray(64)
    try:
        public = Ed25519PrivateKey.from_private_bytes(bytes(seed)).public_key().public_bytes_raw()
        sk[:32] = seed
        sk[32:] = public
        return bytearray(nacl.bindings.crypto_sign_ed25519_sk_to_curve25519(bytes(sk)))
    finally:
        wipe(sk)


def x25519_public_key(scalar: bytes | bytearray) -> bytes:
    _need("X25519 private key", scalar, 32)
    return X25519PrivateKey.from_private_bytes(bytes(scalar)).public_key().public_bytes_raw()


def generate_x25519_keypair(rng: _rng.Randomness | None = None) -> tuple[bytearray, bytes]:
    sk = bytearray(_rng.default(rng).bytes(X25519_KEY_LENGTH))
    return sk, x25519_public_key(sk)


def _exchange(private: X25519PrivateKey, point: bytes) -> bytearray:
    _need("X25519 public key", point, 32)
    try:
        shared = bytearray(private.exchange(X25519PublicKey.from_public_bytes(bytes(point))))
    except ValueError:
        # OpenSSL rejects the all-zero output itself
        raise LowOrderPoint("X25519 produced the all-zero shared secret") from None
    if hmac.compare_digest(bytes(shared), bytes(32)):  # pragma: no cover - OpenSSL catches it first
        wipe(shared)
        raise LowOrderPoint("X25519 produced the all-zero shared secret")
    return shared


def key_agreement(scalar: bytes | bytearray, point: bytes) -> bytearray:
    """X25519(scalar, point). Rejects low-order points."""
    _need("X25519 private key", scalar, 32)
    return _exchange(X25519PrivateKey.from_private_bytes(bytes(scalar)), point)


def derive_pre_key_2(
    suite: CipherSuite | int,
    shared: bytes | bytearray,
    recipient_pub_x: bytes,
    ephemeral_pub_x: bytes,
) -> bytearray:
    """H(shared || recipient X25519 key || ephemeral X25519 key) truncated to 32 bytes."""
    _need("shared secret", shared, 32)
    _need("recipient X25519 key", recipient_pub_x, 32)
    _need("ephemeral X25519 key", ephemeral_pub_x, 32)
    h = _hasher(suite)
    h.update(shared)
    h.update(recipient_pub_x)
    h.update(ephemeral_pub_x)
    return bytearray(h.digest()[:PRE_KEY_LENGTH])


def compute_identification_tag(suite: CipherSuite | int, recipient_pub_ed: bytes, salt: bytes) -> bytes:
    """H(Ed25519 public key || salt) truncated to 16 bytes."""
    _need("Ed25519 public key", recipient_pub_ed, 32)
    _need("salt", salt, SALT_LENGTH)
    return digest(suite, bytes(recipient_pub_ed) + bytes(salt))[:IDENTIFICATION_TAG_LENGTH]


# -- identities ----------------------------------------------------------------


class Identity:
    """An Ed25519 private key together with its derived X25519 pair.

    Treat instances as immutable. Call :meth:`destroy` (or use the instance as
    a context manager) to wipe the retained seed once it is no longer needed.
    """

    __slots__ = ("_seed", "_signing_key", "_x_key", "ed25519_public_key", "x25519_public_key")

    def __init__(self, seed: bytes | bytearray) -> None:
        _need("Ed25519 seed", seed, 32)
        self._seed = bytearray(seed)
        self._signing_key = Ed25519PrivateKey.from_private_bytes(bytes(self._seed))
        self.ed25519_public_key: bytes = self._signing_key.public_key().public_bytes_raw()
        x_private = ed25519_seed_to_x25519(self._seed)
        try:
            self._x_key = X25519PrivateKey.from_private_bytes(bytes(x_private))
        finally:
            wipe(x_private)
        self.x25519_public_key: bytes = ed25519_public_to_x25519(self.ed25519_public_key)

    @classmethod
    def generate(cls, rng: _rng.Randomness | None = None) -> Identity:
        seed = bytearray(_rng.default(rng).bytes(32))
        try:
            return cls(seed)
        finally:
            wipe(seed)

    def export_seed(self) -> bytearray:
        """A copy of the 32-byte Ed25519 seed. The caller must wipe it."""
        self._check_live()
        return bytearray(self._seed)

    def sign(self, message: bytes) -> bytes:
        self._check_live()
        return self._signing_key.sign(bytes(message))

    def agree(self, point: bytes) -> bytearray:
        """X25519 with this identity's private scalar."""
        self._check_live()
        return _exchange(self._x_key, point)

    def destroy(self) -> None:
        wipe(self._seed)
        self._seed = None
        self._signing_key = None
        self._x_key = None

    def _check_live(self) -> None:
        if self._seed is None:
            raise ValueError("identity has been destroyed")

    def __enter__(self) -> Identity:
        return self

    def __exit__(self, *exc) -> None:
        self.destroy()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Identity):
            return NotImplemented
        if self._seed is None or other._seed is None:
            return False
        return hmac.compare_digest(bytes(self._seed), bytes(other._seed))

    def __hash__(self) -> int:
        return hash(self.ed25519_public_key)

    def __repr__(self) -> str:
        return f"Identity(ed25519_public_key={self.ed25519_public_key.hex()})"


# -- content key wrapping ------------------------------------------------------


class ContentKey:
    """The per-write AES-256 key and GCM nonce."""

    __slots__ = ("aes_key", "nonce")

    def __init__(self, aes_key: bytes | bytearray, nonce: bytes) -> None:
        _need("AES key", aes_key, AES_KEY_LENGTH)
        _need("nonce", nonce, NONCE_LENGTH)
        self.aes_key = bytearray(aes_key)
        self.nonce = bytes(nonce)

    @classmethod
    def generate(cls, rng: _rng.Randomness | None = None) -> ContentKey:
        r = _rng.default(rng)
        key = bytearray(r.bytes(AES_KEY_LENGTH))
        try:
            return cls(key, r.bytes(NONCE_LENGTH))
        finally:
            wipe(key)

    def wipe(self) -> None:
        wipe(self.aes_key)


@dataclass(frozen=True)
class KeyWrap:
    ephemeral_public_key: bytes
    aes_pre_key_1: bytes

    def __post_init__(self) -> None:
        _need("ephemeral_public_key", self.ephemeral_public_key, 32)
        _need("aes_pre_key_1", self.aes_pre_key_1, 32)


def wrap_content_key(
    suite: CipherSuite | int,
    content_key: ContentKey,
    recipient_pub_ed: bytes,
    rng: _rng.Randomness | None = None,
) -> KeyWrap:
    """Half of an X25519 exchange against the recipient; hides the AES key by XOR."""
    try:
        recipient_x = ed25519_public_to_x25519(recipient_pub_ed)
    except (InvalidPoint, ValueError) as exc:
        raise InvalidRecipientKey(str(exc)) from None
    eph_sk, eph_pk = generate_x25519_keypair(rng)
    shared = pre2 = None
    try:
        shared = key_agreement(eph_sk, recipient_x)
        pre2 = derive_pre_key_2(suite, shared, recipient_x, eph_pk)
        pre1 = xor_bytes(content_key.aes_key, pre2)
        return KeyWrap(eph_pk, bytes(pre1))
    finally:
        wipe(eph_sk, shared, pre2)


def unwrap_content_key(suite: CipherSuite | int, wrap: KeyWrap, identity: Identity) -> bytearray:
    """Recover the AES key from a wrap addressed to ``identity``.

    A wrap for someone else yields a wrong key, not an error; the AEAD
    decryption downstream is what rejects it.
    """
    shared = identity.agree(wrap.ephemeral_public_key)
    pre2 = None
    try:
        pre2 = derive_pre_key_2(suite, shared, identity.x25519_public_key, wrap.ephemeral_public_key)
        return xor_bytes(wrap.aes_pre_key_1, pre2)
    finally:
        wipe(shared, pre2)


# -- AEAD ------------------------------------------------------------------------


def aead_encrypt(
    key: bytes | bytearray, nonce: bytes, plaintext: bytes, associated_data: bytes | None = None
) -> bytes:
    """AES-256-GCM; returns ciphertext || 16-byte tag.

    Containers never pass associated data; the keystore binds its header.
    """
    _need("AES key", key, AES_KEY_LENGTH)
    _need("nonce", nonce, NONCE_LENGTH)
    return AESGCM(bytes(key)).encrypt(bytes(nonce), bytes(plaintext), associated_data)


def aead_decrypt(
    key: bytes | bytearray, nonce: bytes, ciphertext: bytes, associated_data: bytes | None = None
) -> bytes:
    _need("AES key", key, AES_KEY_LENGTH)
    _need("nonce", nonce, NONCE_LENGTH)
    if len(ciphertext) < GCM_TAG_LENGTH:
        raise AuthenticationFailed("ciphertext shorter than the GCM tag")
    try:
        return AESGCM(bytes(key)).decrypt(bytes(nonce), bytes(ciphertext), associated_data)
    except InvalidTag:
        raise AuthenticationFailed("AES-GCM authentication failed") from None


# -- name signatures -------------------------------------------------------------


def sign_name(identity: Identity, name_utf8: bytes) -> bytes:
    return identity.sign(name_utf8)


def verify_name(public_key_ed25519: bytes, name_utf8: bytes, signature: bytes) -> bool:
    """True iff ``signature`` is the key owner's Ed25519 signature over the raw name bytes."""
    if len(public_key_ed25519) != 32 or len(signature) != 64:
        return False
    try:
        Ed25519PublicKey.from_public_bytes(bytes(public_key_ed25519)).verify(
            bytes(signature), bytes(name_utf8)
        )
    except (InvalidSignature, ValueError):
        return False
    return True
