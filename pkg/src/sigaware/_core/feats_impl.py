"""Identifier normalization and hashed n-gram extraction.

The classifier never sees raw identifiers: the defined function name and
call targets become FUNC, variables become VAR1..VARk in order of first
appearance.  Unigrams and bigrams of the normalized token texts are
hashed with FNV-1a into a fixed number of buckets.

Compiled with Cython when available; semantics are identical either way.
"""

from sigaware.tokens import IDENTIFIER, Token

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data):
    """FNV-1a over a bytes object; fixed across processes and platforms."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK
    return h


def normalize_identifiers(tokens):
    """Map function names to FUNC and variables to VAR1..VARk.

    An identifier directly followed by "(" is in function-name position
    (definition header or call target).  The mapping is bijective per
    sample, so alpha-equivalent programs normalize identically; the
    operation is idempotent.
    """
    out = []
    mapping = {}
    k = 0
    n = len(tokens)
    for i in range(n):
        t = tokens[i]
        if t.kind == IDENTIFIER:
            if i + 1 < n and tokens[i + 1].text == "(":
                text = "FUNC"
            else:
                text = mapping.get(t.text)
                if text is None:
                    k += 1
                    text = "VAR%d" % k
                    mapping[t.text] = text
            out.append(Token(IDENTIFIER, text, i))
        else:
            out.append(Token(t.kind, t.text, i))
    return out


def ngram_buckets(texts, width):
    """Hash buckets of all unigrams and bigrams of a text sequence."""
    buckets = []
    n = len(texts)
    for i in range(n):
        buckets.append(fnv1a64(("U\x1f" + texts[i]).encode("utf-8")) % width)
    for i in range(n - 1):
        buckets.append(fnv1a64(("B\x1f" + texts[i] + "\x1f" + texts[i + 1]).encode("utf-8")) % width)
    return buckets
