"""Lyndon words, Chen-Fox-Lyndon factorization, and Witt dimension counts.

Words are tuples of integer letters < alphabet size, ordered lexicographically
(with the shorter-prefix rule, which is exactly Python tuple comparison).
Lyndon words index a basis of the free Lie algebra; the costandard bracketing
realizes that basis, and Witt's formula counts it, which is what drives the
depth and width bounds for bounded-length word problems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = [
    "Word",
    "BracketTree",
    "is_lyndon",
    "lyndon_words",
    "cfl_factorize",
    "costandard_split",
    "bracket_tree",
    "evaluate_bracket_tree",
    "mobius_sieve",
    "lyndon_count",
    "witt_dimension",
    "depth_bound",
    "width_bound",
    "left_multiplication_generators",
]

Word = tuple


def _as_word(w) -> Word:
    word = tuple(int(x) for x in w)
    if not word:
        raise ValidationError("the empty word is not allowed here")
    if any(x < 0 for x in word):
        raise ValidationError("letters must be nonnegative integers")
    return word


def is_lyndon(w) -> bool:
    """True iff the word is strictly smaller than all its proper rotations."""
    word = _as_word(w)
    return all(word < word[i:] + word[:i] for i in range(1, len(word)))


def lyndon_words(alphabet_size: int, max_length: int):
    """Generate all Lyndon words of length <= max_length in lexicographic order.

    Duval's generation scheme: extend the current word periodically to the
    length cap, then increment the last incrementable letter.
    """
    if alphabet_size < 1 or max_length < 1:
        raise ValidationError("alphabet size and maximum length must be positive")
    w = [-1]
    while w:
        w[-1] += 1
        yield tuple(w)
        m = len(w)
        while len(w) < max_length:
            w.append(w[len(w) - m])
        while w and w[-1] == alphabet_size - 1:
            w.pop()


def cfl_factorize(w) -> list[Word]:
    """Unique factorization into a non-increasing product of Lyndon words.

    Duval's linear-time algorithm; the factors concatenate back to the input.
    """
    word = _as_word(w)
    n = len(word)
    factors = []
    i = 0
    while i < n:
        j, k = i + 1, i
        while j < n and word[k] <= word[j]:
            k = i if word[k] < word[j] else k + 1
            j += 1
        while i <= k:
            factors.append(word[i : i + j - k])
            i += j - k
    return factors


def costandard_split(w) -> tuple[Word, Word]:
    """Split a Lyndon word at its longest proper Lyndon suffix."""
    word = _as_word(w)
    if len(word) < 2:
        raise ValidationError("costandard split needs length >= 2")
    if not is_lyndon(word):
        raise ValidationError(f"{word} is not a Lyndon word")
    for start in range(1, len(word)):
        suffix = word[start:]
        if is_lyndon(suffix):
            return word[:start], suffix
    raise AssertionError("unreachable: single letters are Lyndon")


@dataclass(frozen=True)
class BracketTree:
    """Binary bracketing whose leaves, left to right, spell a Lyndon word."""

    letter: int | None = None
    left: "BracketTree | None" = None
    right: "BracketTree | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.letter is not None

    def word(self) -> Word:
        if self.is_leaf:
            return (self.letter,)
        return self.left.word() + self.right.word()


def bracket_tree(w) -> BracketTree:
    """Recursive costandard bracketing of a Lyndon word."""
    word = _as_word(w)
    if not is_lyndon(word):
        raise ValidationError(f"{word} is not a Lyndon word")
    if len(word) == 1:
        return BracketTree(letter=word[0])
    left, right = costandard_split(word)
    return BracketTree(left=bracket_tree(left), right=bracket_tree(right))


def evaluate_bracket_tree(tree: BracketTree, assignment) -> np.ndarray:
    """Evaluate the bracketing in a matrix algebra, letter -> matrix."""
    if tree.is_leaf:
        try:
            return np.asarray(assignment[tree.letter], dtype=float)
        except (KeyError, IndexError):
            raise ValidationError(f"no matrix assigned to letter {tree.letter}") from None
    a = evaluate_bracket_tree(tree.left, assignment)
    b = evaluate_bracket_tree(tree.right, assignment)
    return a @ b - b @ a


def mobius_sieve(limit: int) -> np.ndarray:
    """Mobius function values mu(1..limit) by a simple factor sieve."""
    mu = np.ones(limit + 1, dtype=np.int64)
    primes_hit = np.zeros(limit + 1, dtype=np.int64)
    for p in range(2, limit + 1):
        if primes_hit[p] == 0:  # p prime
            for q in range(p, limit + 1, p):
                primes_hit[q] += 1
                mu[q] *= -1
            square = p * p
            for q in range(square, limit + 1, square):
                mu[q] = 0
    return mu


def lyndon_count(alphabet_size: int, length: int) -> int:
    """Number of Lyndon words of exactly this length (necklace formula)."""
    if alphabet_size < 1 or length < 1:
        raise ValidationError("alphabet size and length must be positive")
    mu = mobius_sieve(length)
    total = 0
    for d in range(1, length + 1):
        if length % d == 0:
            total += int(mu[length // d]) * alphabet_size**d
    assert total % length == 0
    return total // length


def witt_dimension(alphabet_size: int, max_length: int) -> int:
    """Dimension of the free Lie algebra truncated at the given word length.

    Exact integer arithmetic throughout (Python integers do not overflow);
    this is the state-width price of simulating arbitrary words of bounded
    length, so it grows like alphabet_size**T / T.
    """
    if alphabet_size < 1 or max_length < 1:
        raise ValidationError("alphabet size and maximum length must be positive")
    mu = mobius_sieve(max_length)
    total = 0
    for m in range(1, max_length + 1):
        count = 0
        for d in range(1, m + 1):
            if m % d == 0:
                count += int(mu[m // d]) * alphabet_size**d
        total += count // m
    return total


def depth_bound(max_word_length: int) -> int:
    """Layers sufficient for words up to this length: ceil(log2 T) + 1."""
    if max_word_length < 1:
        raise ValidationError("word length bound must be positive")
    return (max_word_length - 1).bit_length() + 1


def width_bound(alphabet_size: int, max_word_length: int) -> int:
    """Total state dimension of the generic bounded-length construction."""
    return witt_dimension(alphabet_size, max_word_length)


def left_multiplication_generators(alphabet_size: int, degree_cap: int) -> list[np.ndarray]:
    """Faithful nilpotent realization of the free generators.

    Basis: all words of length <= degree_cap over the alphabet, ordered by
    degree descending (lex within a degree). Letter a acts by left
    concatenation, truncating at the cap; in this ordering every generator is
    strictly upper triangular with degree_cap + 1 graded blocks, and brackets
    of Lyndon words up to the cap stay linearly independent.
    """
    if alphabet_size < 1 or degree_cap < 1:
        raise ValidationError("alphabet size and degree cap must be positive")
    words: list[tuple] = []
    for length in range(degree_cap, -1, -1):
        level = [()] if length == 0 else _all_words(alphabet_size, length)
        words.extend(level)
    index = {w: i for i, w in enumerate(words)}
    size = len(words)
    gens = []
    for a in range(alphabet_size):
        m = np.zeros((size, size))
        for w, col in index.items():
            if len(w) < degree_cap:
                m[index[(a,) + w], col] = 1.0
        gens.append(m)
    return gens


def _all_words(alphabet_size: int, length: int) -> list[tuple]:
    out = [()]
    for _ in range(length):
        out = [w + (a,) for w in out for a in range(alphabet_size)]
    return sorted(out)
