"""Secret handling: the key file shared by the CLI and the service."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from .anonymize import PseudonymKey
from .errors import ConfigError


@dataclass(frozen=True)
class SecretConfig:
    pseudonym_key: PseudonymKey
    upload_secret: bytes
    admin_token: str


def parse_key_file(text: str) -> SecretConfig:
    """Parse ``key=value`` lines: pseudonym_key and upload_secret are hex,
    admin_token is free text."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"key file line {lineno} is not key=value: {line!r}")
        values[key.strip()] = value.strip()
    for required in ("pseudonym_key", "upload_secret", "admin_token"):
        if required not in values:
            raise ConfigError(f"key file is missing {required}")
    try:
        upload_secret = bytes.fromhex(values["upload_secret"])
    except ValueError:
        raise ConfigError("upload_secret is not valid hex") from None
    if not upload_secret:
        raise ConfigError("upload_secret is empty")
    if not values["admin_token"]:
        raise ConfigError("admin_token is empty")
    return SecretConfig(
        pseudonym_key=PseudonymKey.from_hex(values["pseudonym_key"]),
        upload_secret=upload_secret,
        admin_token=values["admin_token"],
    )


def load_key_file(path: str | Path) -> SecretConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"key file not found: {path}")
    return parse_key_file(path.read_text("utf-8"))


def generate_key_file_text() -> str:
    """Fresh secrets in the key file format (set-up helper)."""
    return (
        f"pseudonym_key={os.urandom(32).hex()}\n"
        f"upload_secret={os.urandom(32).hex()}\n"
        f"admin_token={os.urandom(16).hex()}\n"
    )
