"""Privacy-preserving substring-of-keyword search.

A suffix-trie (position heap) index over a keyword dictionary is
encrypted node-by-node with PRF path labels and randomized keyword
ciphertexts, then hosted by an untrusted server that answers token walks
without ever seeing a plaintext.  Queries run in two phases: substring to
candidate keywords, then keyword to encrypted files via a counter-chained
inverted index.  Deletion goes through a revocation twin of the index
whose results the client subtracts.
"""

from .client import (
    HttpTransport,
    InProcessTransport,
    Suggestion,
    UserClient,
    make_insert_request,
    make_query_token,
)
from .crypto import KeyBundle, keygen, prf, ske_decrypt, ske_encrypt
from .dictionary_index import (
    SEPARATOR,
    ModifiedPositionHeap,
    filter_candidates,
    make_dictionary_string,
    mph_build,
    mph_search,
)
from .file_index import (
    KeywordFileIndex,
    build_file_index,
    delete_posting,
    file_lookup,
    insert_posting,
)
from .position_heap import PositionHeap, ph_build, ph_search, ph_search_candidates
from .secure_index import (
    EncryptedSearchOutcome,
    InsertRequest,
    SecureIndex,
    apply_insert,
    apply_insert_to_revocation,
    encrypt_index,
    encrypted_search,
)
from .server import CloudServer, LeakageTrace

__all__ = [
    "CloudServer",
    "EncryptedSearchOutcome",
    "HttpTransport",
    "InProcessTransport",
    "InsertRequest",
    "KeyBundle",
    "KeywordFileIndex",
    "LeakageTrace",
    "ModifiedPositionHeap",
    "PositionHeap",
    "SEPARATOR",
    "SecureIndex",
    "Suggestion",
    "UserClient",
    "apply_insert",
    "apply_insert_to_revocation",
    "build_file_index",
    "delete_posting",
    "encrypt_index",
    "encrypted_search",
    "file_lookup",
    "filter_candidates",
    "insert_posting",
    "keygen",
    "make_dictionary_string",
    "make_insert_request",
    "make_query_token",
    "mph_build",
    "mph_search",
    "ph_build",
    "ph_search",
    "ph_search_candidates",
    "prf",
    "ske_decrypt",
    "ske_encrypt",
]
