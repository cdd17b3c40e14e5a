"""Synthetic license-like blobs for property tests and throughput runs."""

from __future__ import annotations

import random
import re
import string
from typing import Sequence

_WS = (" ", "  ", "\t", "\n", "\n\n", " \n ", "\r\n")
_CASES = (str.upper, str.lower, str.title, str.swapcase, str.capitalize)


def reformat(text: str, rng: random.Random) -> str:
    """Re-case, re-space and re-wrap ``text`` without touching its words.

    Only whitespace runs between non-blank chunks are rewritten, so the
    normalized token stream is unchanged.
    """
    chunks = text.split()
    out = []
    width = rng.randint(20, 100)
    line = 0
    for chunk in chunks:
        if rng.random() < 0.3:
            chunk = rng.choice(_CASES)(chunk)
        if out:
            if line + len(chunk) > width:
                sep = "\n"
                line = 0
            else:
                sep = rng.choice(_WS) if rng.random() < 0.2 else " "
            out.append(sep)
        out.append(chunk)
        line += len(chunk) + 1
    lead = rng.choice(("", "\n", "   ", "\n\n\t"))
    return lead + "".join(out) + rng.choice(("", "\n", "\n\n"))


def junk_words(rng: random.Random, n: int) -> list[str]:
    """Random lowercase words that are unlikely to occur in any license."""
    return [
        "".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(6, 12)))
        for _ in range(n)
    ]


def perturb_words(text: str, rng: random.Random, delete: float = 0.0, append: int = 0) -> str:
    """Delete a fraction of the words of ``text`` and append junk words."""
    words = re.findall(r"\S+", text)
    kept = [w for w in words if rng.random() >= delete]
    return " ".join(kept + junk_words(rng, append))


def synthetic_blobs(texts: Sequence[str], n: int, seed: int = 0) -> list[bytes]:
    """``n`` blobs mixing reformatted, edited and unrelated texts.

    Roughly: 60% reformatted licenses, 20% licenses with words deleted or
    appended, 10% unrelated junk, 5% license fragments, 5% empty or
    punctuation-only.
    """
    rng = random.Random(seed)
    blobs = []
    for _ in range(n):
        roll = rng.random()
        base = rng.choice(texts)
        if roll < 0.60:
            text = reformat(base, rng)
        elif roll < 0.80:
            text = perturb_words(base, rng, delete=rng.uniform(0.0, 0.5), append=rng.randint(0, 200))
        elif roll < 0.90:
            text = " ".join(junk_words(rng, rng.randint(1, 300)))
        elif roll < 0.95:
            words = base.split()
            start = rng.randrange(max(1, len(words)))
            text = " ".join(words[start : start + rng.randint(5, 60)])
        else:
            text = rng.choice(("", "\n", "-- * --", "/* */", "=========="))
        blobs.append(text.encode("utf-8"))
    return blobs
