"""Encrypted Container Files: hybrid-encrypted, multi-recipient secret containers."""

from ecf.container import (
    CONTENT_TYPE_BLOB,
    EncryptedContainer,
    RecipientDescriptor,
    choose_m,
    create,
    load,
    write,
)
from ecf.crypto import ContentKey, Identity, KeyWrap
from ecf.errors import ECFError
from ecf.format import PrivateBody, PublicHeader, RecipientBlock, RecipientInfo
from ecf.keystore import (
    CI_KDF,
    DEFAULT_KDF,
    KdfParameters,
    export_descriptor,
    generate_identity,
    load_identity,
    parse_descriptor,
    save_identity,
    serialize_descriptor,
)
from ecf.suites import SHA256_SUITE, SHA512_SUITE, CipherSuite, get_suite

__all__ = [
    "CI_KDF",
    "CONTENT_TYPE_BLOB",
    "DEFAULT_KDF",
    "SHA256_SUITE",
    "SHA512_SUITE",
    "CipherSuite",
    "ContentKey",
    "ECFError",
    "EncryptedContainer",
    "Identity",
    "KdfParameters",
    "KeyWrap",
    "PrivateBody",
    "PublicHeader",
    "RecipientBlock",
    "RecipientDescriptor",
    "RecipientInfo",
    "choose_m",
    "create",
    "export_descriptor",
    "generate_identity",
    "get_suite",
    "load",
    "load_identity",
    "parse_descriptor",
    "save_identity",
    "serialize_descriptor",
    "write",
]

__version__ = "0.1.0"
