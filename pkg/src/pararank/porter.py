"""Porter's suffix-stripping stemmer for English (the original 1980 algorithm).

Self-contained so that analysis is deterministic and needs no external
resources. Input is assumed to be a single lowercase word; words of length
one or two are returned unchanged, as in the reference implementation.
"""

from __future__ import annotations

_VOWELS = "aeiou"


def _is_consonant(word: str, i: int) -> bool:
    c = word[i]
    if c in _VOWELS:
        return False
    if c == "y":
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of vowel-to-consonant transitions: [C](VC)^m[V]."""
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        cons = _is_consonant(stem, i)
        if cons and prev_vowel:
            m += 1
        prev_vowel = not cons
    return m


def _contains_vowel(stem: str) -> bool:
    return any(not _is_consonant(stem, i) for i in range(len(stem)))


def _ends_double_consonant(word: str) -> bool:
    return (len(word) >= 2 and word[-1] == word[-2]
            and _is_consonant(word, len(word) - 1))


def _ends_cvc(word: str) -> bool:
    # consonant-vowel-consonant where the final consonant is not w, x or y
    if len(word) < 3:
        return False
    return (_is_consonant(word, len(word) - 3)
            and not _is_consonant(word, len(word) - 2)
            and _is_consonant(word, len(word) - 1)
            and word[-1] not in "wxy")


def _apply_first(word: str, rules) -> str:
    """Apply the longest-matching suffix rule; its condition gates the rewrite.

    Once a suffix matches, no shorter suffix in the same step is considered,
    whether or not the condition holds.
    """
    for suffix, replacement, condition in rules:
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            if condition(stem):
                return stem + replacement
            return word
    return word


def _m_gt(n: int):
    return lambda stem: _measure(stem) > n


# Steps 2-4: suffix, replacement, condition on the remaining stem.
# Ordered longest suffix first inside each step.
_STEP2 = [
    ("ational", "ate", _m_gt(0)), ("ization", "ize", _m_gt(0)),
    ("iveness", "ive", _m_gt(0)), ("fulness", "ful", _m_gt(0)),
    ("ousness", "ous", _m_gt(0)), ("biliti", "ble", _m_gt(0)),
    ("tional", "tion", _m_gt(0)), ("entli", "ent", _m_gt(0)),
    ("ousli", "ous", _m_gt(0)), ("ation", "ate", _m_gt(0)),
    ("alism", "al", _m_gt(0)), ("aliti", "al", _m_gt(0)),
    ("iviti", "ive", _m_gt(0)), ("enci", "ence", _m_gt(0)),
    ("anci", "ance", _m_gt(0)), ("izer", "ize", _m_gt(0)),
    ("abli", "able", _m_gt(0)), ("alli", "al", _m_gt(0)),
    ("ator", "ate", _m_gt(0)), ("eli", "e", _m_gt(0)),
]

_STEP3 = [
    ("icate", "ic", _m_gt(0)), ("ative", "", _m_gt(0)),
    ("alize", "al", _m_gt(0)), ("iciti", "ic", _m_gt(0)),
    ("ical", "ic", _m_gt(0)), ("ness", "", _m_gt(0)),
    ("ful", "", _m_gt(0)),
]

_STEP4 = [
    ("ement", "", _m_gt(1)), ("ance", "", _m_gt(1)), ("ence", "", _m_gt(1)),
    ("able", "", _m_gt(1)), ("ible", "", _m_gt(1)), ("ment", "", _m_gt(1)),
    ("ion", "", lambda s: _m_gt(1)(s) and s[-1:] in ("s", "t")),
    ("ant", "", _m_gt(1)), ("ent", "", _m_gt(1)), ("ism", "", _m_gt(1)),
    ("ate", "", _m_gt(1)), ("iti", "", _m_gt(1)), ("ous", "", _m_gt(1)),
    ("ive", "", _m_gt(1)), ("ize", "", _m_gt(1)), ("al", "", _m_gt(1)),
    ("er", "", _m_gt(1)), ("ic", "", _m_gt(1)), ("ou", "", _m_gt(1)),
]


def _step1a(word: str) -> str:
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith("ies"):
        return word[:-2]
    if word.endswith("ss"):
        return word
    if word.endswith("s"):
        return word[:-1]
    return word


def _step1b(word: str) -> str:
    if word.endswith("eed"):
        stem = word[:-3]
        return stem + "ee" if _measure(stem) > 0 else word
    stripped = None
    if word.endswith("ed") and _contains_vowel(word[:-2]):
        stripped = word[:-2]
    elif word.endswith("ing") and _contains_vowel(word[:-3]):
        stripped = word[:-3]
    if stripped is None:
        return word
    if stripped.endswith(("at", "bl", "iz")):
        return stripped + "e"
    if _ends_double_consonant(stripped) and stripped[-1] not in "lsz":
        return stripped[:-1]
    if _measure(stripped) == 1 and _ends_cvc(stripped):
        return stripped + "e"
    return stripped


def _step1c(word: str) -> str:
    if word.endswith("y") and _contains_vowel(word[:-1]):
        return word[:-1] + "i"
    return word


def _step5a(word: str) -> str:
    if word.endswith("e"):
        stem = word[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            return stem
    return word


def _step5b(word: str) -> str:
    if (_measure(word) > 1 and _ends_double_consonant(word)
            and word.endswith("l")):
        return word[:-1]
    return word


def stem(word: str) -> str:
    """Stem one lowercase word."""
    if len(word) <= 2:
        return word
    word = _step1a(word)
    word = _step1b(word)
    word = _step1c(word)
    word = _apply_first(word, _STEP2)
    word = _apply_first(word, _STEP3)
    word = _apply_first(word, _STEP4)
    word = _step5a(word)
    word = _step5b(word)
    return word
