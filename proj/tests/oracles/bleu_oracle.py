"""Reference values for the sentence-BLEU tests.

Written independently of the C++ code: n-gram counting with
collections.Counter and exact rational precisions via fractions.
Prints C++ initializer rows: {hypothesis, reference, bleu}.
"""
import math
from collections import Counter
from fractions import Fraction

CASES = [
    ("a b c d e", "a b c d e"),
    ("a b c d e", "a b c d f"),
    ("x y z", "a b c d"),
    ("a b c d", "a b c d e f g h"),
    ("a a a a", "a b c d"),
    ("the cat sat on the mat", "the cat is on the mat"),
    ("a b", "a b c"),
    ("a", "a"),
    ("c b a", "a b c"),
    ("a b c d e f g h", "a b c d"),
    ("a b a b a b", "a b a b"),
    ("q r s t u v", "q r s t u v w x y z"),
    ("a b c e d", "a b c d e"),
]


def ngrams(toks, n):
    return Counter(tuple(toks[i:i + n]) for i in range(len(toks) - n + 1))


def bleu(hyp, ref):
    h, r = hyp.split(), ref.split()
    if not h:
        return 0.0
    logs = 0.0
    for n in range(1, 5):
        hc, rc = ngrams(h, n), ngrams(r, n)
        match = sum(min(c, rc[g]) for g, c in hc.items())
        total = max(len(h) - n + 1, 0)
        p = Fraction(match + (n >= 2), total + (n >= 2))
        if p == 0:
            return 0.0
        logs += math.log(p)
    bp = min(0.0, 1.0 - len(r) / len(h))
    return 100.0 * math.exp(logs / 4 + bp)


for h, r in CASES:
    print(f'    {{"{h}", "{r}", {bleu(h, r)!r}}},')
