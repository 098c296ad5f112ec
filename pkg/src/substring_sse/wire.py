"""Wire-format helpers: binary fields travel as base64, labels as
fixed-width lowercase hex, and errors as {"error": code, "detail": ...}
documents mapped back to exception types on the client."""

from __future__ import annotations

import base64
import binascii

from . import errors
from .errors import MalformedRequestError, SseError

__all__ = [
    "b64e",
    "b64d",
    "label_hex",
    "parse_label",
    "status_for_error",
    "error_document",
    "raise_wire_error",
]


def b64e(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def b64d(text: str) -> bytes:
    try:
        return base64.b64decode(text, validate=True)
    except (binascii.Error, TypeError, ValueError) as exc:
        raise MalformedRequestError(f"invalid base64 field: {exc}") from exc


def label_hex(label: bytes) -> str:
    return label.hex()


def parse_label(text: str, label_bits: int) -> bytes:
    if not isinstance(text, str) or len(text) != label_bits // 4:
        raise MalformedRequestError(
            f"label must be {label_bits // 4} hex chars, got {text!r:.40}"
        )
    try:
        return bytes.fromhex(text)
    except ValueError as exc:
        raise MalformedRequestError(f"invalid label hex: {exc}") from exc


_ERROR_STATUS = {
    "ValidationError": 400,
    "DuplicateKeywordError": 400,
    "SeparatorInKeywordError": 400,
    "SeparatorInQueryError": 400,
    "EmptyQueryError": 400,
    "WeakParameterError": 400,
    "MalformedRequestError": 400,
    "RevokedKeywordError": 409,
    "CounterConflictError": 409,
    "TracingDisabledError": 403,
    "NotInitializedError": 503,
    "UnknownFileIdError": 404,
    "StorageError": 500,
    "DecryptionFailureError": 500,
}


def status_for_error(exc: SseError) -> int:
    return _ERROR_STATUS.get(type(exc).__name__, 500)


def error_document(exc: SseError) -> dict:
    return {"error": type(exc).__name__, "detail": str(exc)}


def raise_wire_error(doc: dict) -> None:
    """Re-raise a server error document as its exception type."""
    name = doc.get("error", "SseError")
    cls = getattr(errors, name, None)
    if not (isinstance(cls, type) and issubclass(cls, SseError)):
        cls = SseError
    raise cls(doc.get("detail", name))
