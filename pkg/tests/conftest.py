import pytest

from substring_sse.crypto import keygen


@pytest.fixture(scope="session")
def keys():
    return keygen(128, 2**12)


@pytest.fixture()
def fig_dictionary():
    # The three-keyword dictionary used by the worked examples throughout.
    return [b"bbab", b"bba", b"aba"]
