"""Text normalization and winnowing fingerprints.

Documents are reduced to a stream of case-folded alphanumeric word tokens,
each k-gram of tokens is hashed with 64-bit FNV-1a, and a window of ``w``
consecutive hashes is slid across the sequence keeping each window's
minimum. The selected hashes, without positions, form the document's
fingerprint set.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

# Word trigrams, window 5. Single words give identical fingerprint sets to
# some distinct SPDX texts at every window; see scripts/calibrate_window.py.
DEFAULT_K = 3
DEFAULT_W = 5

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

# Separator placed between tokens of a k-gram before hashing.
KGRAM_SEPARATOR = b" "

# [^\W_] is "alphanumeric" in the str.isalnum sense.
_TOKEN_RE = re.compile(r"[^\W_]+")


def normalize(text: bytes | str) -> list[str]:
    """Case-fold ``text`` and split it on every non-alphanumeric character.

    Bytes are decoded as UTF-8 with invalid sequences replaced, so any
    input is accepted. Case folding (rather than ``lower``) makes "STRASSE"
    and "straße" the same token.
    """
    if isinstance(text, (bytes, bytearray, memoryview)):
        text = bytes(text).decode("utf-8", errors="replace")
    return _TOKEN_RE.findall(text.casefold())


def fnv1a_64(data: bytes) -> int:
    h = FNV64_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV64_PRIME) & _MASK64
    return h


@lru_cache(maxsize=1 << 18)
def hash_token(token: str) -> int:
    """64-bit FNV-1a of the token's UTF-8 bytes."""
    return fnv1a_64(token.encode("utf-8"))


def kgram_hashes(tokens: Sequence[str], k: int = DEFAULT_K) -> list[int]:
    """Hash every run of ``k`` consecutive tokens, in order."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k == 1:
        return [hash_token(t) for t in tokens]
    return [_hash_kgram(tuple(tokens[i : i + k])) for i in range(len(tokens) - k + 1)]


@lru_cache(maxsize=1 << 20)
def _hash_kgram(gram: tuple[str, ...]) -> int:
    return fnv1a_64(KGRAM_SEPARATOR.join(t.encode("utf-8") for t in gram))


@dataclass(frozen=True)
class FingerprintSet:
    """Distinct winnowing signatures of one document."""

    signatures: frozenset[int] = frozenset()

    @property
    def size(self) -> int:
        return len(self.signatures)

    def __len__(self) -> int:
        return len(self.signatures)

    def __iter__(self) -> Iterator[int]:
        return iter(self.signatures)

    def __contains__(self, item: object) -> bool:
        return item in self.signatures

    def __bool__(self) -> bool:
        return bool(self.signatures)

    @classmethod
    def of(cls, values: Iterable[int]) -> "FingerprintSet":
        return cls(frozenset(values))


def select_minima(hashes: Sequence[int], w: int) -> list[int]:
    """Positions selected by winnowing ``hashes`` with window ``w``.

    Each window contributes the position of its minimum; ties go to the
    rightmost occurrence. A sequence shorter than ``w`` is one window.
    Consecutive windows that select the same position report it once.
    """
    if w < 1:
        raise ValueError(f"w must be >= 1, got {w}")
    n = len(hashes)
    if n == 0:
        return []
    if n <= w:
        best = 0
        for i in range(1, n):
            if hashes[i] <= hashes[best]:
                best = i
        return [best]

    # Monotone deque of candidate positions; hashes strictly increase
    # from front to back so the front is the rightmost minimum.
    window: deque[int] = deque()
    selected: list[int] = []
    for i, h in enumerate(hashes):
        while window and hashes[window[-1]] >= h:
            window.pop()
        window.append(i)
        if window[0] <= i - w:
            window.popleft()
        if i >= w - 1 and (not selected or selected[-1] != window[0]):
            selected.append(window[0])
    return selected


def winnow(tokens: Sequence[str], k: int = DEFAULT_K, w: int = DEFAULT_W) -> FingerprintSet:
    """Winnowing fingerprint set of a token stream.

    Fewer than ``k`` tokens yields the empty set.
    """
    if w < 1:
        raise ValueError(f"w must be >= 1, got {w}")
    hashes = kgram_hashes(tokens, k)
    return FingerprintSet(frozenset(hashes[i] for i in select_minima(hashes, w)))


def fingerprint(text: bytes | str, k: int = DEFAULT_K, w: int = DEFAULT_W) -> FingerprintSet:
    return winnow(normalize(text), k, w)
