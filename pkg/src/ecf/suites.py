"""Cipher suite table.

Both suites use X25519 for key agreement, AES-256-GCM for the private part
and Ed25519 for name signatures. They differ only in the hash function.
"""

from __future__ import annotations

from dataclasses import dataclass

from ecf.errors import UnsupportedSuite


@dataclass(frozen=True)
class CipherSuite:
    id: int
    hash_name: str
    hash_output_length: int
    key_agreement: str = "X25519"
    aead: str = "AES-256-GCM"
    signature: str = "Ed25519"
    # serialized size of a RecipientBlock's key agreement information
    key_agreement_info_length: int = 64

    @property
    def block_length(self) -> int:
        return 16 + self.key_agreement_info_length

    def __str__(self) -> str:
        return f"{self.id} ({self.key_agreement}/{self.aead}/{self.signature}/{self.hash_name})"


SHA512_SUITE = CipherSuite(id=1, hash_name="SHA-512", hash_output_length=64)
SHA256_SUITE = CipherSuite(id=2, hash_name="SHA-256", hash_output_length=32)

SUITES = {s.id: s for s in (SHA512_SUITE, SHA256_SUITE)}
DEFAULT_SUITE = SHA512_SUITE


def get_suite(suite: int | CipherSuite) -> CipherSuite:
    """Resolve a suite id (or pass a suite through), rejecting unknown ids."""
    if isinstance(suite, CipherSuite):
        suite = suite.id
    try:
        return SUITES[suite]
    except (KeyError, TypeError):
        raise UnsupportedSuite(f"unsupported cipher suite {suite!r}") from None
