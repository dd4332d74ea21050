"""``ecf`` command-line tool.

Passwords are read with :func:`getpass.getpass` (no echo) or, for scripts,
from ``ECF_PASSWORD``. They are never accepted on the command line.

Exit codes::

    0  success
    1  other error
    2  I/O failure, or refusing to overwrite an existing file
    3  missing, empty or weak password
    4  invalid descriptor signature
    5  no recipients
    6  not a recipient
    7  tampered container (authentication or hash check failed)
    8  already a recipient / not found / ambiguous or duplicate name
    9  self-removal not confirmed
    10 unparseable container
    11 keystore could not be unlocked (wrong password or damaged file)
"""

from __future__ import annotations

import argparse
import getpass
import hashlib
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

from ecf import errors
from ecf.container import EncryptedContainer
from ecf.crypto import Identity, verify_name
from ecf.format import RecipientInfo, parse_public_header
from ecf.keystore import (
    KDF_PROFILES,
    KdfParameters,
    benchmark_kdf,
    export_descriptor,
    generate_identity,
    load_identity,
    parse_descriptor,
    save_identity,
    serialize_descriptor,
)
from ecf.suites import SUITES

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_IO = 2
EXIT_PASSWORD = 3
EXIT_INVALID_SIGNATURE = 4
EXIT_NO_RECIPIENTS = 5
EXIT_NOT_A_RECIPIENT = 6
EXIT_TAMPERED = 7
EXIT_RECIPIENT_CONFLICT = 8
EXIT_SELF_REMOVAL = 9
EXIT_PARSE = 10
EXIT_KEYSTORE = 11

MIN_PASSWORD_LENGTH = 8
DEFAULT_KEYSTORE = Path("~/.ecf/identity.ecfk")

# order matters: subclasses before their bases
_EXIT_CODES: list[tuple[type[BaseException], int]] = [
    (errors.EmptyPassword, EXIT_PASSWORD),
    (errors.InvalidSignature, EXIT_INVALID_SIGNATURE),
    (errors.NoRecipients, EXIT_NO_RECIPIENTS),
    (errors.DecryptionFailed, EXIT_TAMPERED),
    (errors.NotARecipient, EXIT_NOT_A_RECIPIENT),
    (errors.TamperedPublicPart, EXIT_TAMPERED),
    (errors.TamperedPrivatePart, EXIT_TAMPERED),
    (errors.InvalidNameSignature, EXIT_TAMPERED),
    (errors.AlreadyRecipient, EXIT_RECIPIENT_CONFLICT),
    (errors.NotFound, EXIT_RECIPIENT_CONFLICT),
    (errors.AmbiguousName, EXIT_RECIPIENT_CONFLICT),
    (errors.DuplicateName, EXIT_RECIPIENT_CONFLICT),
    (errors.SelfRemovalNotConfirmed, EXIT_SELF_REMOVAL),
    (errors.ParseError, EXIT_PARSE),
    (OSError, EXIT_IO),
]


class CliError(Exception):
    def __init__(self, message: str, code: int) -> None:
        super().__init__(message)
        self.code = code


@dataclass
class CliConfig:
    keystore_path: Path
    kdf_profile: str = "default"
    non_interactive: bool = False

    @property
    def kdf(self) -> KdfParameters:
        return KDF_PROFILES[self.kdf_profile]

    @property
    def descriptor_path(self) -> Path:
        return descriptor_path_for(self.keystore_path)


def descriptor_path_for(keystore: Path) -> Path:
    return keystore.with_name(keystore.name + ".pub")


def fingerprint(public_key: bytes) -> str:
    """First 16 hex characters of SHA-512 over the Ed25519 public key."""
    return hashlib.sha512(public_key).hexdigest()[:16]


# -- I/O helpers ---------------------------------------------------------------


def atomic_write(path: Path, data: bytes, *, overwrite: bool = True, mode: int = 0o644) -> None:
    """Write to a temporary file beside ``path`` and rename it into place."""
    path = Path(path)
    if not overwrite and path.exists():
        raise CliError(f"{path} already exists (use --force to overwrite)", EXIT_IO)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.chmod(tmp, mode)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def read_input(path: str | None) -> bytes:
    if path is None or path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def write_output(path: str | None, data: bytes) -> None:
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        atomic_write(Path(path), data, mode=0o600)


def warn(message: str) -> None:
    print(f"ecf: warning: {message}", file=sys.stderr)


def read_password(config: CliConfig, prompt: str = "Keystore password: ", confirm: bool = False) -> str:
    env = os.environ.get("ECF_PASSWORD")
    if env is not None:
        return env
    if config.non_interactive:
        raise CliError("no password: set ECF_PASSWORD or run interactively", EXIT_PASSWORD)
    password = getpass.getpass(prompt)
    if confirm and getpass.getpass("Repeat password: ") != password:
        raise CliError("passwords do not match", EXIT_PASSWORD)
    return password


def unlock(config: CliConfig) -> Identity:
    try:
        data = config.keystore_path.read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read keystore {config.keystore_path}: {exc.strerror}", EXIT_IO) from None
    try:
        return load_identity(data, read_password(config))
    except (errors.AuthenticationFailed, errors.KeystoreError, errors.ParseError):
        raise CliError(f"cannot unlock {config.keystore_path}: wrong password or damaged keystore", EXIT_KEYSTORE) from None


def read_descriptor(path: str | Path) -> RecipientInfo:
    try:
        return parse_descriptor(Path(path).read_bytes())
    except (errors.ParseError, ValueError) as exc:
        raise CliError(f"{path}: not a recipient descriptor ({exc})", EXIT_PARSE) from None


def own_public_key(config: CliConfig) -> bytes | None:
    """Public key from the descriptor stored next to the keystore, if any."""
    try:
        return read_descriptor(config.descriptor_path).public_key_ed25519
    except (CliError, OSError):
        return None


# -- commands --------------------------------------------------------------------


def cmd_keygen(args: argparse.Namespace, config: CliConfig) -> int:
    out = Path(args.out).expanduser() if args.out else config.keystore_path
    pub = descriptor_path_for(out)
    if not args.force:
        for p in (out, pub):
            if p.exists():
                raise CliError(f"{p} already exists (use --force to overwrite)", EXIT_IO)
    password = read_password(config, "New keystore password: ", confirm=True)
    if not password:
        raise CliError("password must not be empty", EXIT_PASSWORD)
    if len(password) < MIN_PASSWORD_LENGTH:
        raise CliError(f"password must have at least {MIN_PASSWORD_LENGTH} characters", EXIT_PASSWORD)
    with generate_identity() as identity:
        descriptor = export_descriptor(identity, args.name)
        keystore = save_identity(identity, password, config.kdf)
    out.parent.mkdir(parents=True, exist_ok=True)
    atomic_write(out, keystore, mode=0o600)
    atomic_write(pub, serialize_descriptor(descriptor))
    print(f"keystore:    {out}")
    print(f"descriptor:  {pub}")
    print(f"name:        {descriptor.name}")
    print(f"fingerprint: {fingerprint(descriptor.public_key_ed25519)}")
    return EXIT_OK


def cmd_info(args: argparse.Namespace, config: CliConfig) -> int:
    d = read_descriptor(args.descriptor)
    ok = verify_name(d.public_key_ed25519, d.name.encode("utf-8"), d.name_signature)
    print(f"name:        {d.name}")
    print(f"fingerprint: {fingerprint(d.public_key_ed25519)}")
    print(f"public key:  {d.public_key_ed25519.hex()}")
    print(f"signature:   {'valid' if ok else 'INVALID'}")
    return EXIT_OK if ok else EXIT_INVALID_SIGNATURE


def cmd_create(args: argparse.Namespace, config: CliConfig) -> int:
    out = Path(args.out)
    if out.exists() and not args.force:
        raise CliError(f"{out} already exists (use --force to overwrite)", EXIT_IO)
    descriptors = [read_descriptor(p) for p in args.recipient]
    own_key = own_public_key(config)
    if args.add_self:
        self_desc = read_descriptor(config.descriptor_path)
        with unlock(config) as identity:
            if identity.ed25519_public_key != self_desc.public_key_ed25519:
                raise CliError(f"{config.descriptor_path} does not belong to the keystore", EXIT_INVALID_SIGNATURE)
        own_key = identity.ed25519_public_key
        descriptors.insert(0, self_desc)
    if not descriptors:
        raise CliError("no recipients given (use --recipient and/or --add-self)", EXIT_NO_RECIPIENTS)

    container = EncryptedContainer.create(int(args.suite))
    for d in descriptors:
        container.add_recipient(d, allow_duplicate_name=args.allow_duplicate_name)
    if own_key is None or not container.find_recipients(own_key):
        warn("you are not a recipient of this container and will not be able to open it")
    container.set_content(read_input(args.content))
    atomic_write(out, container.write(full_obfuscation=args.full_obfuscation))
    print(f"wrote {out} for {len(container)} recipient(s)", file=sys.stderr)
    return EXIT_OK


def _open(path: str, config: CliConfig, verify_names: bool = True) -> tuple[EncryptedContainer, Identity]:
    data = Path(path).read_bytes()
    identity = unlock(config)
    return EncryptedContainer.load(data, identity, verify_signatures=verify_names), identity


def cmd_extract(args: argparse.Namespace, config: CliConfig) -> int:
    container, identity = _open(args.ecf, config, not args.no_verify_names)
    identity.destroy()
    write_output(args.out, container.content)
    return EXIT_OK


def cmd_update(args: argparse.Namespace, config: CliConfig) -> int:
    container, identity = _open(args.ecf, config, not args.no_verify_names)
    identity.destroy()
    container.set_content(read_input(args.content))
    atomic_write(Path(args.ecf), container.write(full_obfuscation=args.full_obfuscation))
    print(f"updated {args.ecf}", file=sys.stderr)
    return EXIT_OK


def _selector(text: str, by_name: bool) -> bytes | str:
    if not by_name and len(text) == 64:
        try:
            return bytes.fromhex(text)
        except ValueError:
            pass
    return text


def cmd_recipients(args: argparse.Namespace, config: CliConfig) -> int:
    verify = args.action != "list" and not args.no_verify_names
    container, identity = _open(args.ecf, config, verify)
    with identity:
        if args.action == "list":
            for r in container.recipients:
                ok = verify_name(r.public_key_ed25519, r.name.encode("utf-8"), r.name_signature)
                me = "*" if r.public_key_ed25519 == identity.ed25519_public_key else " "
                print(f"{me} {fingerprint(r.public_key_ed25519)}  {'valid  ' if ok else 'INVALID'}  {r.name}")
            return EXIT_OK
        if args.action == "add":
            container.add_recipient(read_descriptor(args.target), allow_duplicate_name=args.allow_duplicate_name)
        else:
            removed = container.remove_recipient(
                _selector(args.target, args.by_name), identity, confirm_self_removal=args.confirm_self_removal
            )
            if removed.public_key_ed25519 == identity.ed25519_public_key:
                warn("you removed yourself; you cannot open the new version of this file")
    if not container.recipients:
        raise CliError("refusing to write a container without recipients", EXIT_NO_RECIPIENTS)
    atomic_write(Path(args.ecf), container.write(full_obfuscation=args.full_obfuscation))
    print(f"updated {args.ecf}: {len(container)} recipient(s)", file=sys.stderr)
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace, config: CliConfig) -> int:
    data = Path(args.ecf).read_bytes()
    header = parse_public_header(data)
    print(f"file size:                 {len(data)}")
    print(f"container version:         {header.container_version}")
    print(f"cipher suite:              {header.suite}")
    print(f"public header length:      {header.public_header_length}")
    print(f"private length:            {header.private_length}")
    print(f"recipient blocks (includes obfuscation): {header.recipient_count_public}")
    print("true recipient count:      not visible without decryption")
    if len(data) != header.public_header_length + header.private_length:
        print("warning: file size does not match the declared lengths")
        return EXIT_PARSE
    return EXIT_OK


def cmd_bench_kdf(args: argparse.Namespace, config: CliConfig) -> int:
    params = KDF_PROFILES[args.profile or config.kdf_profile]
    seconds = benchmark_kdf(params)
    print(
        f"Argon2id parallelism={params.parallelism} memory={params.memory_mib} MiB "
        f"iterations={params.iterations}: {seconds:.3f} s"
    )
    return EXIT_OK


# -- argument parsing --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ecf", description="Encrypted Container Files for shared secrets.")
    p.add_argument("--keystore", help="identity keystore (default: $ECF_KEYSTORE or ~/.ecf/identity.ecfk)")
    p.add_argument("--kdf-profile", choices=sorted(KDF_PROFILES), help="Argon2id cost profile for new keystores")
    p.add_argument("--non-interactive", action="store_true", help="never prompt; read ECF_PASSWORD")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("keygen", help="create an identity keystore and a public descriptor")
    s.add_argument("--name", required=True, help="self-chosen display name, e.g. 'Bob <bob@example.org>'")
    s.add_argument("--out", help="keystore path (descriptor goes to <out>.pub)")
    s.add_argument("--force", action="store_true")
    s.set_defaults(func=cmd_keygen)

    s = sub.add_parser("info", help="show a recipient descriptor")
    s.add_argument("descriptor")
    s.set_defaults(func=cmd_info)

    def reencrypt_flags(s: argparse.ArgumentParser) -> None:
        s.add_argument("--full-obfuscation", action="store_true", help="build decoy blocks from real key pairs")

    s = sub.add_parser("create", help="encrypt content for a set of recipients")
    s.add_argument("--content", default="-", help="input file (default: stdin)")
    s.add_argument("-r", "--recipient", action="append", default=[], metavar="DESCRIPTOR")
    s.add_argument("--add-self", action="store_true", help="add the keystore's identity as a recipient")
    s.add_argument("--suite", choices=[str(i) for i in sorted(SUITES)], default="1")
    s.add_argument("--allow-duplicate-name", action="store_true")
    s.add_argument("--out", required=True)
    s.add_argument("--force", action="store_true")
    reencrypt_flags(s)
    s.set_defaults(func=cmd_create)

    s = sub.add_parser("extract", help="decrypt a container's content")
    s.add_argument("ecf")
    s.add_argument("--out", default="-", help="output file (default: stdout)")
    s.add_argument("--no-verify-names", action="store_true", help="skip recipient name signature checks")
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("update", help="replace a container's content")
    s.add_argument("ecf")
    s.add_argument("--content", default="-", help="new content file (default: stdin)")
    s.add_argument("--no-verify-names", action="store_true")
    reencrypt_flags(s)
    s.set_defaults(func=cmd_update)

    s = sub.add_parser("recipients", help="list, add or remove recipients")
    s.add_argument("ecf")
    s.add_argument("action", choices=["list", "add", "remove"])
    s.add_argument("target", nargs="?", help="descriptor file (add) or public key hex / name (remove)")
    s.add_argument("--by-name", action="store_true", help="treat the remove selector as a name")
    s.add_argument("--confirm-self-removal", action="store_true")
    s.add_argument("--allow-duplicate-name", action="store_true")
    s.add_argument("--no-verify-names", action="store_true")
    reencrypt_flags(s)
    s.set_defaults(func=cmd_recipients)

    s = sub.add_parser("inspect", help="show public metadata; needs no identity")
    s.add_argument("ecf")
    s.set_defaults(func=cmd_inspect)

    s = sub.add_parser("bench-kdf", help="time one Argon2id derivation")
    s.add_argument("--profile", choices=sorted(KDF_PROFILES))
    s.set_defaults(func=cmd_bench_kdf)
    return p


def config_from(args: argparse.Namespace) -> CliConfig:
    keystore = args.keystore or os.environ.get("ECF_KEYSTORE") or DEFAULT_KEYSTORE
    profile = args.kdf_profile or os.environ.get("ECF_KDF_PROFILE") or "default"
    if profile not in KDF_PROFILES:
        raise CliError(f"unknown KDF profile {profile!r}", EXIT_ERROR)
    return CliConfig(Path(keystore).expanduser(), profile, args.non_interactive)


def exit_code_for(exc: BaseException) -> int:
    for cls, code in _EXIT_CODES:
        if isinstance(exc, cls):
            return code
    return EXIT_ERROR


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "recipients" and args.action != "list" and not args.target:
        parser.error(f"recipients {args.action} needs a target")
    try:
        return args.func(args, config_from(args))
    except CliError as exc:
        print(f"ecf: {exc}", file=sys.stderr)
        return exc.code
    except (errors.ECFError, OSError) as exc:
        message = exc.strerror if isinstance(exc, OSError) and exc.strerror else str(exc)
        print(f"ecf: {type(exc).__name__}: {message}", file=sys.stderr)
        return exit_code_for(exc)
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
