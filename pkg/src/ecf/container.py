"""The container lifecycle: create, write, load, and recipient management.

An :class:`EncryptedContainer` is the decrypted, in-memory view. Nothing is
persisted until :meth:`EncryptedContainer.write` is called, and every write
re-encrypts from scratch with a fresh AES key, nonce, salt and ephemeral keys.
"""

from __future__ import annotations

import hmac
from collections.abc import Iterable

from ecf import rng as _rng
from ecf.crypto import (
    ContentKey,
    Identity,
    KeyWrap,
    aead_decrypt,
    aead_encrypt,
    compute_identification_tag,
    derive_pre_key_2,
    digest,
    ed25519_seed_to_x25519,
    generate_x25519_keypair,
    key_agreement,
    unwrap_content_key,
    verify_name,
    wrap_content_key,
    xor_bytes,
)
from ecf.errors import (
    AlreadyRecipient,
    AmbiguousName,
    AuthenticationFailed,
    ContentTooLarge,
    DecryptionFailed,
    DuplicateName,
    InvalidNameSignature,
    InvalidSignature,
    LowOrderPoint,
    NoRecipients,
    NotARecipient,
    NotFound,
    SelfRemovalNotConfirmed,
    TamperedPrivatePart,
    TamperedPublicPart,
    UnsupportedContentType,
)
from ecf.format import (
    CONTAINER_VERSION,
    GCM_TAG_LENGTH,
    U32_MAX,
    PrivateBody,
    PublicHeader,
    RecipientBlock,
    RecipientInfo,
    masked_header_bytes,
    parse_private_body,
    private_body_length,
    private_body_prefix,
    public_header_length,
    serialize_public_header,
    split_container,
)
from ecf.memory import wipe
from ecf.suites import DEFAULT_SUITE, CipherSuite, get_suite

CONTENT_TYPE_BLOB = 0
SUPPORTED_CONTENT_TYPES = frozenset({CONTENT_TYPE_BLOB})

# The exchangeable "public information" of a user is exactly a recipient record.
RecipientDescriptor = RecipientInfo


def choose_m(n: int, rng: _rng.Randomness | None = None) -> int:
    """Number of public blocks for ``n`` real recipients: uniform on [n, max(8, 2n)]."""
    if n < 0:
        raise ValueError("recipient count cannot be negative")
    return _rng.uniform_int(_rng.default(rng), n, max(8, 2 * n))


def make_obfuscation_block_fast(rng: _rng.Randomness | None = None) -> RecipientBlock:
    """Fresh ephemeral X25519 public key, random tag, random pre key."""
    r = _rng.default(rng)
    eph_sk, eph_pk = generate_x25519_keypair(r)
    wipe(eph_sk)
    tag = r.bytes(16)
    pre1 = r.bytes(32)
    return RecipientBlock.from_parts(tag, eph_pk, pre1)


def make_obfuscation_block_full(
    suite: CipherSuite | int, salt: bytes, rng: _rng.Randomness | None = None
) -> RecipientBlock:
    """A block built exactly like a real one, for a throwaway random identity."""
    r = _rng.default(rng)
    seed = bytearray(r.bytes(32))
    fake = Identity(seed)
    x_private = ed25519_seed_to_x25519(seed)
    eph_sk = shared = pre2 = key = None
    try:
        tag = compute_identification_tag(suite, fake.ed25519_public_key, salt)
        eph_sk, eph_pk = generate_x25519_keypair(r)
        key = bytearray(r.bytes(32))
        shared = key_agreement(eph_sk, fake.x25519_public_key)
        pre2 = derive_pre_key_2(suite, shared, fake.x25519_public_key, eph_pk)
        pre1 = xor_bytes(key, pre2)
        return RecipientBlock.from_parts(tag, eph_pk, bytes(pre1))
    finally:
        wipe(seed, x_private, eph_sk, shared, pre2, key)
        fake.destroy()


def _check_content(content: bytes | bytearray) -> bytes:
    if len(content) > U32_MAX:
        raise ContentTooLarge(f"content of {len(content)} bytes exceeds {U32_MAX}")
    return bytes(content)


class EncryptedContainer:
    """Decrypted container: suite, content type, recipient list and content.

    Single-owner and mutable; the recipient list keeps insertion order and is
    unique by Ed25519 public key.
    """

    def __init__(
        self,
        suite: CipherSuite | int = DEFAULT_SUITE,
        content_type: int = CONTENT_TYPE_BLOB,
        recipients: Iterable[RecipientInfo] = (),
        content: bytes = b"",
    ) -> None:
        self.suite = get_suite(suite)
        if content_type not in SUPPORTED_CONTENT_TYPES:
            raise UnsupportedContentType(f"content type {content_type} is not supported")
        self.content_type = content_type
        self._recipients: list[RecipientInfo] = []
        for r in recipients:
            if self._index_of_key(r.public_key_ed25519) is not None:
                raise AlreadyRecipient(f"duplicate recipient key {r.public_key_ed25519.hex()}")
            self._recipients.append(r)
        self._content = _check_content(content)

    @classmethod
    def create(cls, suite: CipherSuite | int = DEFAULT_SUITE, content_type: int = CONTENT_TYPE_BLOB):
        return cls(suite, content_type)

    # -- accessors ---------------------------------------------------------

    @property
    def recipients(self) -> tuple[RecipientInfo, ...]:
        return tuple(self._recipients)

    @property
    def content(self) -> bytes:
        return self._content

    def __len__(self) -> int:
        return len(self._recipients)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EncryptedContainer):
            return NotImplemented
        return (
            self.suite == other.suite
            and self.content_type == other.content_type
            and self._recipients == other._recipients
            and self._content == other._content
        )

    def __repr__(self) -> str:
        return (
            f"EncryptedContainer(suite={self.suite.id}, content_type={self.content_type}, "
            f"n={len(self._recipients)}, content_length={len(self._content)})"
        )

    def _index_of_key(self, public_key: bytes) -> int | None:
        for i, r in enumerate(self._recipients):
            if r.public_key_ed25519 == public_key:
                return i
        return None

    # -- modification ------------------------------------------------------

    def set_content(self, new_content: bytes) -> None:
        self._content = _check_content(new_content)

    def add_recipient(self, descriptor: RecipientDescriptor, allow_duplicate_name: bool = False) -> None:
        """Verify the descriptor's name signature and append it to the recipients."""
        if not verify_name(descriptor.public_key_ed25519, descriptor.name.encode("utf-8"), descriptor.name_signature):
            raise InvalidSignature(f"name signature of {descriptor.name!r} does not verify")
        if self._index_of_key(descriptor.public_key_ed25519) is not None:
            raise AlreadyRecipient(f"{descriptor.name!r} is already a recipient")
        if not allow_duplicate_name and any(r.name == descriptor.name for r in self._recipients):
            raise DuplicateName(f"a recipient named {descriptor.name!r} already exists")
        self._recipients.append(descriptor)

    def find_recipients(self, selector: bytes | str) -> list[RecipientInfo]:
        """Recipients matching a 32-byte public key or an exact name."""
        if isinstance(selector, (bytes, bytearray)):
            return [r for r in self._recipients if r.public_key_ed25519 == bytes(selector)]
        return [r for r in self._recipients if r.name == selector]

    def remove_recipient(
        self,
        selector: bytes | str,
        acting_identity: Identity | None = None,
        confirm_self_removal: bool = False,
    ) -> RecipientInfo:
        """Remove the recipient selected by public key or unique name.

        Removing ``acting_identity`` itself raises :class:`SelfRemovalNotConfirmed`
        unless ``confirm_self_removal`` is set.
        """
        matches = self.find_recipients(selector)
        if not matches:
            raise NotFound(f"no recipient matches {_describe(selector)}")
        if len(matches) > 1:
            raise AmbiguousName(f"{len(matches)} recipients are named {selector!r}")
        target = matches[0]
        if (
            acting_identity is not None
            and target.public_key_ed25519 == acting_identity.ed25519_public_key
            and not confirm_self_removal
        ):
            raise SelfRemovalNotConfirmed("refusing to remove the acting identity without confirmation")
        self._recipients.remove(target)
        return target

    # -- persistence -------------------------------------------------------

    def write(
        self,
        rng: _rng.Randomness | None = None,
        *,
        force: bool = False,
        full_obfuscation: bool = False,
    ) -> bytes:
        """Encrypt the container into its on-disk form.

        Refuses to write with no recipients unless ``force`` is given.
        ``full_obfuscation`` builds decoy blocks from real key material
        instead of random bytes.
        """
        r = _rng.default(rng)
        n = len(self._recipients)
        if n == 0 and not force:
            raise NoRecipients("a container without recipients cannot be opened by anyone")
        suite = self.suite
        key = ContentKey.generate(r)
        salt = r.bytes(16)
        body_prefix = None
        try:
            m = choose_m(n, r)
            blocks = []
            for rec in self._recipients:
                tag = compute_identification_tag(suite, rec.public_key_ed25519, salt)
                wrap = wrap_content_key(suite, key, rec.public_key_ed25519, r)
                blocks.append(RecipientBlock.from_parts(tag, wrap.ephemeral_public_key, wrap.aes_pre_key_1))
            for _ in range(m - n):
                if full_obfuscation:
                    blocks.append(make_obfuscation_block_full(suite, salt, r))
                else:
                    blocks.append(make_obfuscation_block_fast(r))
            _rng.shuffle(blocks, r)

            placeholder_hash = bytes(suite.hash_output_length)
            body = PrivateBody(self.content_type, placeholder_hash, self._recipients, self._content)
            header = PublicHeader(
                container_version=CONTAINER_VERSION,
                cipher_suite_id=suite.id,
                public_header_length=public_header_length(m, suite),
                private_length=private_body_length(body) + GCM_TAG_LENGTH,
                salt=salt,
                symmetric_nonce=key.nonce,
                blocks=tuple(blocks),
            )
            header_bytes = serialize_public_header(header)
            body = PrivateBody(
                self.content_type, digest(suite, masked_header_bytes(header_bytes)), self._recipients, self._content
            )
            body_prefix = bytearray(private_body_prefix(body))
            body_prefix += digest(suite, body_prefix)
            ciphertext = aead_encrypt(key.aes_key, key.nonce, body_prefix)
        finally:
            key.wipe()
            wipe(body_prefix)
        assert len(ciphertext) == header.private_length
        return header_bytes + ciphertext

    @classmethod
    def load(cls, data: bytes, identity: Identity, verify_signatures: bool = True) -> EncryptedContainer:
        """Decrypt ``data`` as ``identity``.

        Public blocks are only routing hints: every block carrying the
        identity's tag is tried and AES-GCM decides. The recovered private part
        is then checked against its own hash, the public part against the
        stored header hash, and (by default) every recipient's name signature.
        """
        header, header_bytes, ciphertext = split_container(data)
        suite = header.suite
        my_tag = compute_identification_tag(suite, identity.ed25519_public_key, header.salt)
        candidates = [b for b in header.blocks if hmac.compare_digest(b.identification_tag, my_tag)]
        if not candidates:
            raise NotARecipient("no recipient block carries this identity's tag")

        plaintext = None
        for block in candidates:
            key = None
            try:
                key = unwrap_content_key(suite, KeyWrap(block.ephemeral_public_key, block.aes_pre_key_1), identity)
                plaintext = bytearray(aead_decrypt(key, header.symmetric_nonce, ciphertext))
                break
            except (AuthenticationFailed, LowOrderPoint):
                continue
            finally:
                wipe(key)
        if plaintext is None:
            raise DecryptionFailed(f"{len(candidates)} matching block(s), none authenticated the private part")

        try:
            body = parse_private_body(bytes(plaintext), suite)
            h = suite.hash_output_length
            if not hmac.compare_digest(digest(suite, memoryview(plaintext)[:-h]), body.private_hash):
                raise TamperedPrivatePart("private hash does not match the private part")
        finally:
            wipe(plaintext)
        if not hmac.compare_digest(digest(suite, masked_header_bytes(header_bytes)), body.public_header_hash):
            raise TamperedPublicPart("public header hash does not match the public part")
        if body.content_type not in SUPPORTED_CONTENT_TYPES:
            raise UnsupportedContentType(f"content type {body.content_type} is not supported")
        if verify_signatures:
            for rec in body.recipients:
                if not verify_name(rec.public_key_ed25519, rec.name.encode("utf-8"), rec.name_signature):
                    raise InvalidNameSignature(f"name signature of recipient {rec.name!r} does not verify")
        if len({r.public_key_ed25519 for r in body.recipients}) != len(body.recipients):
            raise TamperedPrivatePart("recipient list contains duplicate keys")
        return cls(suite, body.content_type, body.recipients, body.content)


def _describe(selector: bytes | str) -> str:
    if isinstance(selector, (bytes, bytearray)):
        return f"key {bytes(selector).hex()}"
    return f"name {selector!r}"


def create(suite: CipherSuite | int = DEFAULT_SUITE, content_type: int = CONTENT_TYPE_BLOB) -> EncryptedContainer:
    return EncryptedContainer.create(suite, content_type)


def write(container: EncryptedContainer, rng: _rng.Randomness | None = None, **kwargs) -> bytes:
    return container.write(rng, **kwargs)


def load(data: bytes, identity: Identity, verify_signatures: bool = True) -> EncryptedContainer:
    return EncryptedContainer.load(data, identity, verify_signatures)
