"""Keys and the two primitives everything is built from.

* a keyed pseudo-random function mapping arbitrary bytes to fixed-width
  labels (HMAC-SHA-256, expanded in counter mode when a width above 256
  bits is required), and
* a randomized symmetric cipher (AES-256-GCM) for keywords, file ids and
  file bodies.  GCM is authenticated, so tampering and wrong-key
  decryption surface as :class:`DecryptionFailureError` instead of
  garbage plaintext.

Label width is chosen from the collision budget: with width
``security_bits + 2*log2(expected labels)`` the chance of any two
distinct inputs sharing a label stays below ``2**-security_bits``;
the result is rounded up to a multiple of the native 256-bit PRF width.
"""

from __future__ import annotations

import hashlib
import hmac
import math
import os
import secrets
import struct
from dataclasses import dataclass
from functools import lru_cache

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .errors import DecryptionFailureError, ValidationError, WeakParameterError

PRF_NATIVE_BITS = 256
_NONCE_BYTES = 12
_TAG_BYTES = 16
_KEYFILE_MAGIC = b"SSEKEY01"

__all__ = [
    "PRF_NATIVE_BITS",
    "KeyBundle",
    "keygen",
    "label_width_bits",
    "prf",
    "ske_encrypt",
    "ske_decrypt",
    "save_key_bundle",
    "load_key_bundle",
]


@dataclass(frozen=True)
class KeyBundle:
    """All client-held secrets plus the parameters they were drawn for.

    label_key drives trie path labels and query tokens, data_key the
    symmetric cipher, posting_key the per-keyword file-index keys.
    """

    label_key: bytes
    data_key: bytes
    posting_key: bytes
    security_bits: int
    label_bits: int


def label_width_bits(security_bits: int, expected_index_size: int) -> int:
    """Smallest multiple of the native PRF width meeting the collision bound."""
    size = max(1, int(expected_index_size))
    needed = security_bits + 2 * math.ceil(math.log2(size))
    return PRF_NATIVE_BITS * math.ceil(needed / PRF_NATIVE_BITS)


def keygen(security_bits: int = 128, expected_index_size: int = 2**20) -> KeyBundle:
    """Draw fresh independent keys and pick the label width.

    ``security_bits`` must be 128 or 256 (the supported cipher strengths);
    anything weaker is rejected outright.
    """
    if security_bits < 128:
        raise WeakParameterError(f"security parameter {security_bits} is below 128 bits")
    if security_bits not in (128, 256):
        raise ValidationError(f"unsupported security parameter {security_bits}")
    if expected_index_size < 1:
        raise ValidationError("expected index size must be positive")
    key_bytes = security_bits // 8
    return KeyBundle(
        label_key=secrets.token_bytes(key_bytes),
        data_key=secrets.token_bytes(key_bytes),
        posting_key=secrets.token_bytes(key_bytes),
        security_bits=security_bits,
        label_bits=label_width_bits(security_bits, expected_index_size),
    )


def prf(key: bytes, message: bytes, label_bits: int = PRF_NATIVE_BITS) -> bytes:
    """Deterministic keyed label of exactly ``label_bits`` bits."""
    if label_bits == PRF_NATIVE_BITS:
        return hmac.new(key, message, hashlib.sha256).digest()
    if label_bits <= 0 or label_bits % 8:
        raise ValidationError(f"label width {label_bits} is not a positive byte multiple")
    out = bytearray()
    block = 0
    while len(out) * 8 < label_bits:
        out += hmac.new(key, block.to_bytes(4, "big") + message, hashlib.sha256).digest()
        block += 1
    return bytes(out[: label_bits // 8])


@lru_cache(maxsize=128)
def _cipher(key: bytes) -> AESGCM:
    return AESGCM(key)


def ske_encrypt(key: bytes, plaintext: bytes) -> bytes:
    """Randomized encryption: a fresh nonce per call, prepended to the box."""
    nonce = secrets.token_bytes(_NONCE_BYTES)
    return nonce + _cipher(key).encrypt(nonce, plaintext, None)


def ske_decrypt(key: bytes, blob: bytes) -> bytes:
    if len(blob) < _NONCE_BYTES + _TAG_BYTES:
        raise DecryptionFailureError("ciphertext too short")
    try:
        return _cipher(key).decrypt(blob[:_NONCE_BYTES], blob[_NONCE_BYTES:], None)
    except InvalidTag as exc:
        raise DecryptionFailureError("ciphertext failed authentication") from exc


def save_key_bundle(path: str | os.PathLike, keys: KeyBundle) -> None:
    """Write the versioned key file, readable by the owner only."""
    body = _KEYFILE_MAGIC + struct.pack(">HH", keys.security_bits, keys.label_bits)
    for part in (keys.label_key, keys.data_key, keys.posting_key):
        body += struct.pack(">H", len(part)) + part
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
    try:
        os.write(fd, body)
    finally:
        os.close(fd)
    os.chmod(path, 0o600)


def load_key_bundle(path: str | os.PathLike) -> KeyBundle:
    with open(path, "rb") as handle:
        body = handle.read()
    if not body.startswith(_KEYFILE_MAGIC):
        raise ValidationError(f"{path}: not a key file (bad magic)")
    offset = len(_KEYFILE_MAGIC)
    security_bits, label_bits = struct.unpack_from(">HH", body, offset)
    offset += 4
    parts: list[bytes] = []
    for _ in range(3):
        (length,) = struct.unpack_from(">H", body, offset)
        offset += 2
        parts.append(body[offset : offset + length])
        if len(parts[-1]) != length:
            raise ValidationError(f"{path}: truncated key file")
        offset += length
    return KeyBundle(
        label_key=parts[0],
        data_key=parts[1],
        posting_key=parts[2],
        security_bits=security_bits,
        label_bits=label_bits,
    )
