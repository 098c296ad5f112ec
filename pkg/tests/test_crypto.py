import secrets
import stat

import pytest

from substring_sse.crypto import (
    KeyBundle,
    keygen,
    label_width_bits,
    load_key_bundle,
    prf,
    save_key_bundle,
    ske_decrypt,
    ske_encrypt,
)
from substring_sse.errors import (
    DecryptionFailureError,
    ValidationError,
    WeakParameterError,
)


def test_prf_is_deterministic(keys):
    assert prf(keys.label_key, b"ab") == prf(keys.label_key, b"ab")


def test_prf_extension_changes_output(keys):
    assert prf(keys.label_key, b"ab") != prf(keys.label_key, b"abc")


def test_prf_width():
    key = secrets.token_bytes(16)
    assert len(prf(key, b"x", 256)) == 32
    assert len(prf(key, b"x", 512)) == 64
    # Wide output extends the native one block at a time, deterministically.
    assert prf(key, b"x", 512) == prf(key, b"x", 512)
    with pytest.raises(ValidationError):
        prf(key, b"x", 100)


def test_prf_no_collisions_at_scale():
    key = secrets.token_bytes(16)
    labels = {prf(key, i.to_bytes(4, "big")) for i in range(100_000)}
    assert len(labels) == 100_000


def test_keygen_label_width_bound():
    assert label_width_bits(128, 2**20) == 256
    assert label_width_bits(256, 2**20) == 512
    assert label_width_bits(256, 1) == 256
    assert label_width_bits(256, 2) == 512  # one extra bit already overflows
    assert keygen(128, 2**20).label_bits == 256
    assert keygen(256, 2**20).label_bits == 512


def test_keygen_rejects_weak_parameters():
    with pytest.raises(WeakParameterError):
        keygen(64)
    with pytest.raises(ValidationError):
        keygen(192)
    with pytest.raises(ValidationError):
        keygen(128, 0)


def test_keygen_draws_fresh_keys():
    a, b = keygen(), keygen()
    assert a.label_key != b.label_key
    assert a.data_key != b.data_key
    assert a.posting_key != b.posting_key


def test_encrypt_roundtrip(keys):
    assert ske_decrypt(keys.data_key, ske_encrypt(keys.data_key, b"aba")) == b"aba"
    assert ske_decrypt(keys.data_key, ske_encrypt(keys.data_key, b"")) == b""


def test_encrypt_is_randomized(keys):
    boxes = {ske_encrypt(keys.data_key, b"aba") for _ in range(1000)}
    assert len(boxes) == 1000


def test_decrypt_rejects_wrong_key(keys):
    other = keygen()
    box = ske_encrypt(keys.data_key, b"aba")
    with pytest.raises(DecryptionFailureError):
        ske_decrypt(other.data_key, box)


def test_decrypt_rejects_tampering(keys):
    box = bytearray(ske_encrypt(keys.data_key, b"aba"))
    box[-1] ^= 0x01
    with pytest.raises(DecryptionFailureError):
        ske_decrypt(keys.data_key, bytes(box))
    with pytest.raises(DecryptionFailureError):
        ske_decrypt(keys.data_key, b"short")


def test_key_file_roundtrip(tmp_path, keys):
    path = tmp_path / "keys.bin"
    save_key_bundle(path, keys)
    assert load_key_bundle(path) == keys
    mode = stat.S_IMODE(path.stat().st_mode)
    assert mode == 0o600


def test_key_file_rejects_garbage(tmp_path):
    path = tmp_path / "keys.bin"
    path.write_bytes(b"not a key file")
    with pytest.raises(ValidationError):
        load_key_bundle(path)
