"""One-dimensional cellular automata over a small alphabet, with periodic boundary."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Iterator, Union

import numpy as np

from .state import (
    Word,
    WordLike,
    all_words,
    as_word,
    check_guard,
    index_to_word,
    word_to_index,
    words_to_indices,
)

BUILTIN_RULES = ("identity", "increment", "leftsum", "random")


@dataclass(frozen=True)
class RuleTable:
    """Local rule of radius ``radius``.

    ``table[c]`` is the new letter for the neighbourhood whose base-``k`` code
    is ``c``; the leftmost cell of the neighbourhood is the most significant digit.
    """

    radius: int
    table: np.ndarray
    k: int = 4
    name: str = "custom"

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be non-negative")
        size = self.k ** (2 * self.radius + 1)
        if self.table.shape != (size,):
            raise ValueError(f"rule table must have {size} entries, got {self.table.shape}")
        if self.table.min() < 0 or self.table.max() >= self.k:
            raise ValueError("rule output letter outside alphabet")

    @property
    def width(self) -> int:
        return 2 * self.radius + 1

    @classmethod
    def from_function(cls, radius: int, fn, k: int = 4, name: str = "custom") -> "RuleTable":
        hoods = all_words(2 * radius + 1, k)
        table = np.array([fn(tuple(int(a) for a in h)) for h in hoods], dtype=np.int64)
        return cls(radius, table, k, name)

    def __eq__(self, other):
        if not isinstance(other, RuleTable):
            return NotImplemented
        return (self.radius, self.k) == (other.radius, other.k) and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash((self.radius, self.k, self.table.tobytes()))


def identity_rule(k: int = 4) -> RuleTable:
    return RuleTable.from_function(0, lambda h: h[0], k, "identity")


def increment_rule(k: int = 4) -> RuleTable:
    return RuleTable.from_function(0, lambda h: (h[0] + 1) % k, k, "increment")


def leftsum_rule(k: int = 4) -> RuleTable:
    return RuleTable.from_function(1, lambda h: (h[0] + h[1]) % k, k, "leftsum")


def random_rule(seed: int, radius: int = 1, k: int = 4) -> RuleTable:
    rng = np.random.default_rng(seed)
    table = rng.integers(0, k, size=k ** (2 * radius + 1), dtype=np.int64)
    return RuleTable(radius, table, k, "random")


def builtin_rule(name: str, seed: int = 0, radius: int = 1) -> RuleTable:
    if name == "identity":
        return identity_rule()
    if name == "increment":
        return increment_rule()
    if name == "leftsum":
        return leftsum_rule()
    if name == "random":
        return random_rule(seed, radius)
    raise ValueError(f"unknown builtin rule {name!r}; choose from {', '.join(BUILTIN_RULES)}")


def step_words(rule: RuleTable, words: np.ndarray) -> np.ndarray:
    """Apply one step to every row of a ``(..., n)`` letter array at once."""
    code = np.zeros(words.shape, dtype=np.int64)
    for offset in range(-rule.radius, rule.radius + 1):
        code = code * rule.k + np.roll(words, -offset, axis=-1)
    return rule.table[code]


def iterate_words(rule: RuleTable, words: np.ndarray, m: int) -> np.ndarray:
    if m < 0:
        raise ValueError("iteration count must be non-negative")
    out = np.asarray(words, dtype=np.int64)
    for _ in range(m):
        out = step_words(rule, out)
    return out


def step(rule: RuleTable, w: WordLike) -> Word:
    arr = np.array(as_word(w, rule.k), dtype=np.int64)
    if arr.size == 0:
        raise ValueError("cannot step an empty word")
    return tuple(int(a) for a in step_words(rule, arr))


def iterate(rule: RuleTable, w: WordLike, m: int) -> Word:
    """``m``-fold composition of :func:`step`; ``m = 0`` returns ``w``."""
    arr = np.array(as_word(w, rule.k), dtype=np.int64)
    return tuple(int(a) for a in iterate_words(rule, arr, m))


def iterate_all(rule: RuleTable, n: int, m: int) -> np.ndarray:
    """Index of ``f^(m)(A)`` for every word ``A`` of length ``n``, in index order."""
    return words_to_indices(iterate_words(rule, all_words(n, rule.k), m), rule.k)


@dataclass(frozen=True)
class IntermediateProduct:
    """All pairs ``(A, f^(t1)(A))`` for ``A`` of length ``n``.

    ``images[i]`` is the index of the image of the word with index ``i``.
    """

    rule: RuleTable
    t1: int
    n: int
    images: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.images)

    def __contains__(self, pair) -> bool:
        a, b = pair
        k = self.rule.k
        a, b = as_word(a, k), as_word(b, k)
        if len(a) != self.n or len(b) != self.n:
            return False
        return int(self.images[word_to_index(a, k)]) == word_to_index(b, k)

    def pairs(self) -> Iterator[tuple[Word, Word]]:
        k = self.rule.k
        for i, j in enumerate(self.images):
            yield index_to_word(i, self.n, k), index_to_word(int(j), self.n, k)

    def replay(self) -> bool:
        """Re-derive every pair by direct iteration of the rule."""
        return all(iterate(self.rule, a, self.t1) == b for a, b in self.pairs())


def intermediate_product(rule: RuleTable, t1: int, n: int) -> IntermediateProduct:
    check_guard(n)
    if t1 < 0:
        raise ValueError("horizon must be non-negative")
    images = iterate_all(rule, n, t1)
    images.setflags(write=False)
    return IntermediateProduct(rule, t1, n, images)


class Verifier:
    """Membership oracle for an intermediate product, counting every query.

    A classical call ``verifier(a, b)`` costs one query; so does one coherent
    application of the phase oracle :meth:`flip_phase`.
    """

    def __init__(self, product_: IntermediateProduct):
        self.product = product_
        self.queries = 0

    def __call__(self, a: WordLike, b: WordLike) -> bool:
        self.queries += 1
        return (a, b) in self.product

    def flip_phase(self, x: np.ndarray, anchor: WordLike) -> np.ndarray:
        """Negate the amplitude of every ``y`` with ``(anchor, y)`` in the product, in place."""
        self.queries += 1
        target = int(self.product.images[word_to_index(anchor, self.product.rule.k)])
        x[target] *= -1.0
        return x


def verifier(p: IntermediateProduct) -> Verifier:
    return Verifier(p)


def dump_rule(rule: RuleTable) -> str:
    lines = [f"radius={rule.radius}"]
    for hood, out in zip(product(range(rule.k), repeat=rule.width), rule.table):
        lines.append(f"{''.join(map(str, hood))} -> {int(out)}")
    return "\n".join(lines) + "\n"


def parse_rule(text: str, k: int = 4) -> RuleTable:
    """Parse the ``radius=R`` / ``neighbourhood -> letter`` rule file format."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or not lines[0].startswith("radius="):
        raise ValueError("rule file must start with a 'radius=R' header")
    radius = int(lines[0].split("=", 1)[1])
    width = 2 * radius + 1
    table = np.full(k**width, -1, dtype=np.int64)
    for ln in lines[1:]:
        try:
            lhs, rhs = (part.strip() for part in ln.split("->"))
        except ValueError:
            raise ValueError(f"malformed rule line {ln!r}") from None
        if len(lhs) != width:
            raise ValueError(f"neighbourhood {lhs!r} should have {width} letters")
        code = word_to_index(lhs, k)
        if table[code] != -1:
            raise ValueError(f"duplicate neighbourhood {lhs!r}")
        out = as_word(rhs, k)
        if len(out) != 1:
            raise ValueError(f"output {rhs!r} must be a single letter")
        table[code] = out[0]
    missing = np.flatnonzero(table < 0)
    if missing.size:
        raise ValueError(f"rule table incomplete: {missing.size} neighbourhoods missing")
    return RuleTable(radius, table, k, "file")


def load_rule(path: Union[str, Path]) -> RuleTable:
    return parse_rule(Path(path).read_text())
