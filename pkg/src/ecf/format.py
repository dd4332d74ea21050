"""Byte-exact encoding and decoding of the ECF on-disk structures.

A container file is the public header immediately followed by the AES-GCM
ciphertext of the private body (ciphertext, then the 16-byte GCM tag)::

    u32 container_version
    u32 cipher_suite
    u32 public_header_length      bytes of the whole public part
    u32 private_length            ciphertext + GCM tag
    u32 recipient_count           m, includes obfuscation blocks
    16  salt
    12  symmetric_nonce
    m * (16 identification_tag || key_agreement_info)

    -- encrypted --
    u32 content_type
    H   public_header_hash
    u32 recipient_count           n, the true recipients
    n * (32 ed25519 key || string name || 64 signature)
    u32 content_length
        content
    H   private_hash

All integers are little-endian u32; strings are a u32 byte length followed by
UTF-8 without BOM. ``H`` is the suite's digest length. Nothing here performs
cryptography; digests and keys are opaque byte strings.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

from ecf.errors import (
    InvalidUtf8Name,
    LengthMismatch,
    OversizeString,
    Truncated,
    UnsupportedVersion,
)
from ecf.suites import CipherSuite, get_suite

CONTAINER_VERSION = 1
FORMAT_CODE = 0xECFFC0DE
U32_MAX = 0xFFFFFFFF

SALT_LENGTH = 16
NONCE_LENGTH = 12
IDENTIFICATION_TAG_LENGTH = 16
GCM_TAG_LENGTH = 16
PUBLIC_KEY_LENGTH = 32
SIGNATURE_LENGTH = 64
MAX_NAME_BYTES = 64 * 1024

# offset of the public_header_length field, masked while hashing
HEADER_LENGTH_OFFSET = 8

_U32 = struct.Struct("<I")
_GENERAL = struct.Struct("<IIIII16s12s")
GENERAL_HEADER_LENGTH = _GENERAL.size  # 48

# smallest possible serialized RecipientInfo (empty name)
_MIN_RECIPIENT_INFO = PUBLIC_KEY_LENGTH + _U32.size + SIGNATURE_LENGTH


def encode_u32(value: int) -> bytes:
    if not 0 <= value <= U32_MAX:
        raise ValueError(f"{value} does not fit in an unsigned 32-bit field")
    return _U32.pack(value)


def decode_u32(data: bytes, offset: int = 0) -> int:
    if len(data) - offset < 4:
        raise Truncated("need 4 bytes for an unsigned integer")
    return _U32.unpack_from(data, offset)[0]


def encode_string(text: str) -> bytes:
    raw = text.encode("utf-8")
    if len(raw) > U32_MAX:
        raise OversizeString(f"string of {len(raw)} bytes exceeds the u32 length prefix")
    return _U32.pack(len(raw)) + raw


def decode_string(data: bytes, offset: int = 0, max_bytes: int = U32_MAX) -> tuple[str, int]:
    """Decode a length-prefixed string; return it with the offset just past it."""
    r = _Reader(data, offset)
    text = r.string(max_bytes)
    return text, r.pos


class _Reader:
    def __init__(self, data: bytes, pos: int = 0) -> None:
        self.data = data
        self.pos = pos

    @property
    def remaining(self) -> int:
        return len(self.data) - self.pos

    def take(self, n: int) -> bytes:
        if n > self.remaining:
            raise Truncated(f"need {n} bytes at offset {self.pos}, have {self.remaining}")
        out = bytes(self.data[self.pos : self.pos + n])
        self.pos += n
        return out

    def u32(self) -> int:
        return _U32.unpack(self.take(4))[0]

    def string(self, max_bytes: int) -> str:
        n = self.u32()
        if n > max_bytes:
            raise LengthMismatch(f"string length {n} exceeds limit of {max_bytes} bytes")
        raw = self.take(n)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InvalidUtf8Name(f"invalid UTF-8 at offset {self.pos - n + exc.start}") from None


def _check_len(name: str, value: bytes, n: int) -> None:
    if len(value) != n:
        raise ValueError(f"{name} must be {n} bytes, got {len(value)}")


def _check_u32(name: str, value: int) -> None:
    if not 0 <= value <= U32_MAX:
        raise ValueError(f"{name}={value} does not fit in u32")


# -- public part -------------------------------------------------------------


@dataclass(frozen=True)
class RecipientBlock:
    """One public per-recipient wrap (real or obfuscation)."""

    identification_tag: bytes
    key_agreement_info: bytes

    def __post_init__(self) -> None:
        _check_len("identification_tag", self.identification_tag, IDENTIFICATION_TAG_LENGTH)

    @classmethod
    def from_parts(cls, tag: bytes, ephemeral_public_key: bytes, aes_pre_key_1: bytes) -> RecipientBlock:
        _check_len("ephemeral_public_key", ephemeral_public_key, 32)
        _check_len("aes_pre_key_1", aes_pre_key_1, 32)
        return cls(bytes(tag), bytes(ephemeral_public_key) + bytes(aes_pre_key_1))

    @property
    def ephemeral_public_key(self) -> bytes:
        return self.key_agreement_info[:32]

    @property
    def aes_pre_key_1(self) -> bytes:
        return self.key_agreement_info[32:64]

    def to_bytes(self) -> bytes:
        return self.identification_tag + self.key_agreement_info


@dataclass(frozen=True)
class PublicHeader:
    container_version: int
    cipher_suite_id: int
    public_header_length: int
    private_length: int
    salt: bytes
    symmetric_nonce: bytes
    blocks: tuple[RecipientBlock, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "blocks", tuple(self.blocks))
        _check_len("salt", self.salt, SALT_LENGTH)
        _check_len("symmetric_nonce", self.symmetric_nonce, NONCE_LENGTH)
        for name in ("container_version", "cipher_suite_id", "public_header_length", "private_length"):
            _check_u32(name, getattr(self, name))
        _check_u32("recipient_count_public", len(self.blocks))

    @property
    def recipient_count_public(self) -> int:
        """m: the number of public blocks, obfuscation blocks included."""
        return len(self.blocks)

    @property
    def suite(self) -> CipherSuite:
        return get_suite(self.cipher_suite_id)


def public_header_length(m: int, suite: CipherSuite | int) -> int:
    return GENERAL_HEADER_LENGTH + m * get_suite(suite).block_length


def serialize_public_header(h: PublicHeader) -> bytes:
    general = _GENERAL.pack(
        h.container_version,
        h.cipher_suite_id,
        h.public_header_length,
        h.private_length,
        len(h.blocks),
        h.salt,
        h.symmetric_nonce,
    )
    return general + b"".join(b.to_bytes() for b in h.blocks)


def parse_public_header(data: bytes) -> PublicHeader:
    """Parse the public part at the start of ``data``.

    Trailing bytes (the ciphertext) are ignored; the header consumes exactly
    ``public_header_length`` bytes.
    """
    if len(data) < GENERAL_HEADER_LENGTH:
        raise Truncated(f"public header needs {GENERAL_HEADER_LENGTH} bytes, got {len(data)}")
    version, suite_id, header_len, private_len, m, salt, nonce = _GENERAL.unpack_from(data, 0)
    if version != CONTAINER_VERSION:
        raise UnsupportedVersion(f"container version {version} (expected {CONTAINER_VERSION})")
    suite = get_suite(suite_id)
    expected = public_header_length(m, suite)
    if header_len != expected:
        raise LengthMismatch(f"public_header_length is {header_len} but {m} blocks need {expected}")
    if len(data) < header_len:
        raise Truncated(f"public header declares {header_len} bytes, got {len(data)}")

    r = _Reader(data, GENERAL_HEADER_LENGTH)
    blocks = tuple(
        RecipientBlock(r.take(IDENTIFICATION_TAG_LENGTH), r.take(suite.key_agreement_info_length))
        for _ in range(m)
    )
    return PublicHeader(version, suite_id, header_len, private_len, salt, nonce, blocks)


def masked_header_bytes(serialized_header: bytes) -> bytes:
    """The header bytes with public_header_length replaced by ``0xECFFC0DE``.

    This is the input of the public header hash, on both write and load.
    """
    o = HEADER_LENGTH_OFFSET
    return serialized_header[:o] + encode_u32(FORMAT_CODE) + serialized_header[o + 4 :]


# -- private part ------------------------------------------------------------


@dataclass(frozen=True)
class RecipientInfo:
    """A recipient's public identity: key, self-chosen name, name signature.

    The same triple doubles as the exchangeable recipient descriptor; its
    serialization (:meth:`to_bytes`) is the descriptor file format.
    """

    public_key_ed25519: bytes
    name: str
    name_signature: bytes

    def __post_init__(self) -> None:
        _check_len("public_key_ed25519", self.public_key_ed25519, PUBLIC_KEY_LENGTH)
        _check_len("name_signature", self.name_signature, SIGNATURE_LENGTH)
        if len(self.name.encode("utf-8")) > MAX_NAME_BYTES:
            raise OversizeString(f"recipient names are limited to {MAX_NAME_BYTES} UTF-8 bytes")

    def to_bytes(self) -> bytes:
        return self.public_key_ed25519 + encode_string(self.name) + self.name_signature

    @classmethod
    def from_bytes(cls, data: bytes) -> RecipientInfo:
        r = _Reader(data)
        info = _read_recipient(r)
        if r.remaining:
            raise LengthMismatch(f"{r.remaining} trailing bytes after recipient record")
        return info


def _read_recipient(r: _Reader) -> RecipientInfo:
    key = r.take(PUBLIC_KEY_LENGTH)
    name = r.string(MAX_NAME_BYTES)
    sig = r.take(SIGNATURE_LENGTH)
    return RecipientInfo(key, name, sig)


@dataclass(frozen=True)
class PrivateBody:
    content_type: int
    public_header_hash: bytes
    recipients: tuple[RecipientInfo, ...] = ()
    content: bytes = b""
    private_hash: bytes = field(default=b"")

    def __post_init__(self) -> None:
        object.__setattr__(self, "recipients", tuple(self.recipients))
        _check_u32("content_type", self.content_type)
        _check_u32("recipient_count", len(self.recipients))
        _check_u32("content_length", len(self.content))
        if len(self.public_header_hash) not in (32, 64):
            raise ValueError("public_header_hash must be a 32- or 64-byte digest")
        if self.private_hash and len(self.private_hash) != len(self.public_header_hash):
            raise ValueError("private_hash and public_header_hash lengths differ")

    @property
    def recipient_count(self) -> int:
        return len(self.recipients)

    @property
    def content_length(self) -> int:
        return len(self.content)


def private_body_prefix(b: PrivateBody) -> bytes:
    """Serialized body up to, not including, ``private_hash``."""
    parts = [encode_u32(b.content_type), b.public_header_hash, encode_u32(len(b.recipients))]
    parts.extend(r.to_bytes() for r in b.recipients)
    parts.append(encode_u32(len(b.content)))
    parts.append(b.content)
    return b"".join(parts)


def private_body_length(b: PrivateBody) -> int:
    return len(private_body_prefix(b)) + len(b.public_header_hash)


def serialize_private_body(b: PrivateBody) -> bytes:
    if len(b.private_hash) != len(b.public_header_hash):
        raise ValueError("private_hash is not set")
    return private_body_prefix(b) + b.private_hash


def parse_private_body(data: bytes, suite: CipherSuite | int) -> PrivateBody:
    h = get_suite(suite).hash_output_length
    r = _Reader(data)
    content_type = r.u32()
    header_hash = r.take(h)
    n = r.u32()
    if n * _MIN_RECIPIENT_INFO > r.remaining:
        raise Truncated(f"{n} recipients cannot fit in {r.remaining} bytes")
    recipients = tuple(_read_recipient(r) for _ in range(n))
    content_len = r.u32()
    content = r.take(content_len)
    private_hash = r.take(h)
    if r.remaining:
        raise LengthMismatch(f"{r.remaining} trailing bytes after private_hash")
    return PrivateBody(content_type, header_hash, recipients, content, private_hash)


def split_container(data: bytes) -> tuple[PublicHeader, bytes, bytes]:
    """Split a container file into (parsed header, header bytes, ciphertext)."""
    header = parse_public_header(data)
    rest = len(data) - header.public_header_length
    if rest < header.private_length:
        raise Truncated(f"private part declares {header.private_length} bytes, file has {rest}")
    if rest > header.private_length:
        raise LengthMismatch(f"{rest - header.private_length} bytes after the private part")
    return header, bytes(data[: header.public_header_length]), bytes(data[header.public_header_length :])
