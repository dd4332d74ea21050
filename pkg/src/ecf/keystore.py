"""Password-protected identity files and recipient descriptors.

Keystore layout (96 bytes, integers little-endian u32)::

    4   magic "ECFK"
    u32 version (1)
    u32 argon2 parallelism
    u32 argon2 memory, MiB
    u32 argon2 iterations
    16  argon2 salt
    12  GCM nonce
    48  sealed Ed25519 seed (32) || GCM tag (16)

The AES-256-GCM key is Argon2id(password, salt, params). The first 48 bytes
are passed as associated data, so the recorded parameters cannot be edited
without failing authentication.

A descriptor file is a serialized :class:`~ecf.format.RecipientInfo`:
public key (32) || length-prefixed name || signature (64).
"""

from __future__ import annotations

import struct
import time
from dataclasses import dataclass

from argon2.low_level import Type, hash_secret_raw

from ecf import rng as _rng
from ecf.crypto import AES_KEY_LENGTH, Identity, aead_decrypt, aead_encrypt, sign_name
from ecf.errors import (
    BadMagic,
    EmptyName,
    EmptyPassword,
    OversizeName,
    Truncated,
    UnsupportedVersion,
)
from ecf.format import MAX_NAME_BYTES, RecipientInfo
from ecf.memory import wipe

MAGIC = b"ECFK"
KEYSTORE_VERSION = 1
_HEADER = struct.Struct("<4sIIII16s12s")
KEYSTORE_LENGTH = _HEADER.size + 32 + 16  # 96

MIN_MEMORY_MIB = 8
# upper caps keep a damaged or hostile keystore from demanding absurd work
MAX_MEMORY_MIB = 64 * 1024
MAX_ITERATIONS = 64
MAX_PARALLELISM = 64


@dataclass(frozen=True)
class KdfParameters:
    parallelism: int = 1
    memory_mib: int = 2048
    iterations: int = 5

    def __post_init__(self) -> None:
        if self.parallelism < 1 or self.iterations < 1 or self.memory_mib < MIN_MEMORY_MIB:
            raise ValueError(
                f"KDF parameters below the safe floor (parallelism >= 1, memory >= {MIN_MEMORY_MIB} MiB, "
                f"iterations >= 1): {self}"
            )
        if (
            self.parallelism > MAX_PARALLELISM
            or self.iterations > MAX_ITERATIONS
            or self.memory_mib > MAX_MEMORY_MIB
        ):
            raise ValueError(
                f"KDF parameters above the supported maximum (parallelism <= {MAX_PARALLELISM}, "
                f"memory <= {MAX_MEMORY_MIB} MiB, iterations <= {MAX_ITERATIONS}): {self}"
            )

    @property
    def memory_bytes(self) -> int:
        return self.memory_mib * 1024 * 1024


DEFAULT_KDF = KdfParameters()
# cheap profile for tests and CI; never for real keys
CI_KDF = KdfParameters(parallelism=1, memory_mib=16, iterations=2)
KDF_PROFILES = {"default": DEFAULT_KDF, "ci": CI_KDF}


def derive_key(password: str, salt: bytes, params: KdfParameters) -> bytearray:
    """Argon2id(password, salt) -> 32-byte key."""
    pw = bytearray(password.encode("utf-8"))
    try:
        return bytearray(
            hash_secret_raw(
                secret=bytes(pw),
                salt=salt,
                time_cost=params.iterations,
                memory_cost=params.memory_mib * 1024,
                parallelism=params.parallelism,
                hash_len=AES_KEY_LENGTH,
                type=Type.ID,
            )
        )
    finally:
        wipe(pw)


@dataclass(frozen=True)
class KeystoreFile:
    kdf: KdfParameters
    argon_salt: bytes
    nonce: bytes
    sealed_seed: bytes
    version: int = KEYSTORE_VERSION

    def header_bytes(self) -> bytes:
        return _HEADER.pack(
            MAGIC,
            self.version,
            self.kdf.parallelism,
            self.kdf.memory_mib,
            self.kdf.iterations,
            self.argon_salt,
            self.nonce,
        )

    def to_bytes(self) -> bytes:
        return self.header_bytes() + self.sealed_seed

    @classmethod
    def from_bytes(cls, data: bytes) -> KeystoreFile:
        if len(data) < 4 or data[:4] != MAGIC:
            raise BadMagic("not an ECF keystore file")
        if len(data) < KEYSTORE_LENGTH:
            raise Truncated(f"keystore needs {KEYSTORE_LENGTH} bytes, got {len(data)}")
        if len(data) > KEYSTORE_LENGTH:
            raise BadMagic(f"keystore has {len(data) - KEYSTORE_LENGTH} unexpected trailing bytes")
        _, version, par, mem, it, salt, nonce = _HEADER.unpack_from(data)
        if version != KEYSTORE_VERSION:
            raise UnsupportedVersion(f"keystore version {version}")
        try:
            kdf = KdfParameters(par, mem, it)
        except ValueError as exc:
            raise BadMagic(f"keystore records invalid KDF parameters: {exc}") from None
        return cls(kdf, salt, nonce, bytes(data[_HEADER.size :]), version)


def generate_identity(rng: _rng.Randomness | None = None) -> Identity:
    return Identity.generate(rng)


def save_identity(
    identity: Identity,
    password: str,
    params: KdfParameters = DEFAULT_KDF,
    rng: _rng.Randomness | None = None,
) -> bytes:
    """Seal the identity's seed under a password. Returns the 96-byte file."""
    if not password:
        raise EmptyPassword("a keystore password must not be empty")
    r = _rng.default(rng)
    shell = KeystoreFile(params, r.bytes(16), r.bytes(12), b"")
    key = seed = None
    try:
        key = derive_key(password, shell.argon_salt, params)
        seed = identity.export_seed()
        sealed = aead_encrypt(key, shell.nonce, seed, shell.header_bytes())
    finally:
        wipe(key, seed)
    return KeystoreFile(params, shell.argon_salt, shell.nonce, sealed).to_bytes()


def load_identity(data: bytes, password: str) -> Identity:
    """Unseal a keystore file. A wrong password raises AuthenticationFailed."""
    ks = KeystoreFile.from_bytes(data)
    key = seed = None
    try:
        key = derive_key(password, ks.argon_salt, ks.kdf)
        seed = bytearray(aead_decrypt(key, ks.nonce, ks.sealed_seed, ks.header_bytes()))
        return Identity(seed)
    finally:
        wipe(key, seed)


def benchmark_kdf(params: KdfParameters = DEFAULT_KDF) -> float:
    """Seconds for one key derivation with ``params`` on this machine."""
    start = time.perf_counter()
    wipe(derive_key("benchmark", bytes(16), params))
    return time.perf_counter() - start


# -- descriptors -------------------------------------------------------------


def export_descriptor(identity: Identity, name: str) -> RecipientInfo:
    """The identity's shareable public information, with a signed name."""
    if not name:
        raise EmptyName("recipient name must not be empty")
    raw = name.encode("utf-8")
    if len(raw) > MAX_NAME_BYTES:
        raise OversizeName(f"recipient names are limited to {MAX_NAME_BYTES} UTF-8 bytes")
    return RecipientInfo(identity.ed25519_public_key, name, sign_name(identity, raw))


def serialize_descriptor(descriptor: RecipientInfo) -> bytes:
    return descriptor.to_bytes()


def parse_descriptor(data: bytes) -> RecipientInfo:
    return RecipientInfo.from_bytes(data)
