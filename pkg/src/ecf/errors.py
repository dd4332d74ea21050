"""Exception hierarchy for the ECF library.

Every failure the library reports is an :class:`ECFError`. The CLI maps the
leaf classes onto stable exit codes, so do not rename them casually.
"""

from __future__ import annotations


class ECFError(Exception):
    """Base class for all ECF errors."""


# -- format ------------------------------------------------------------------


class ParseError(ECFError):
    """Input bytes are not a well-formed ECF structure."""


class Truncated(ParseError):
    """Input ends before the declared lengths are satisfied."""


class LengthMismatch(ParseError):
    """A declared length disagrees with the structure or the input size."""


class UnsupportedVersion(ParseError):
    pass


class UnsupportedSuite(ParseError):
    pass


class InvalidUtf8Name(ParseError):
    pass


class OversizeString(ECFError, ValueError):
    """String too long for a 4-byte length prefix (or the parse cap)."""


# -- crypto ------------------------------------------------------------------


class CryptoError(ECFError):
    pass


class AuthenticationFailed(CryptoError):
    """AEAD tag did not verify: wrong key, wrong nonce or tampered data."""


class InvalidPoint(CryptoError):
    """Public key is not a valid, non-small-order curve point."""


class LowOrderPoint(CryptoError):
    """X25519 produced the all-zero shared secret."""


class InvalidRecipientKey(CryptoError):
    pass


class RandomnessFailure(CryptoError):
    pass


# -- container ---------------------------------------------------------------


class ContainerError(ECFError):
    pass


class UnsupportedContentType(ContainerError):
    pass


class NoRecipients(ContainerError):
    pass


class NotARecipient(ContainerError):
    """The identity cannot open this container."""


class DecryptionFailed(NotARecipient, AuthenticationFailed):
    """Some block carried the identity's tag, but no candidate authenticated.

    This is what ciphertext tampering looks like from a legitimate
    recipient's point of view.
    """


class TamperedPrivatePart(ContainerError):
    pass


class TamperedPublicPart(ContainerError):
    pass


class InvalidNameSignature(ContainerError):
    """A recipient record inside a decrypted container has a bad signature."""


class ContentTooLarge(ContainerError, ValueError):
    pass


class InvalidSignature(ContainerError):
    """A recipient descriptor offered for addition has a bad signature."""


class AlreadyRecipient(ContainerError):
    pass


class DuplicateName(ContainerError):
    pass


class NotFound(ContainerError):
    pass


class AmbiguousName(ContainerError):
    pass


class SelfRemovalNotConfirmed(ContainerError):
    pass


# -- keystore ----------------------------------------------------------------


class KeystoreError(ECFError):
    pass


class BadMagic(KeystoreError, ParseError):
    pass


class EmptyPassword(KeystoreError, ValueError):
    pass


class EmptyName(KeystoreError, ValueError):
    pass


class OversizeName(KeystoreError, OversizeString):
    pass
