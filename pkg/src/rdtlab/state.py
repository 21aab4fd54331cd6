"""Real state vectors over word bases, sampling, and elementary orthogonal transforms.

States are plain 1-D ``float64`` numpy arrays. Basis index ``i`` of a space of
words of length ``n`` over a ``k``-letter alphabet is the base-``k`` number
spelled by the word, leftmost letter most significant.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Union

import numpy as np

Word = tuple[int, ...]
WordLike = Union[str, Sequence[int]]
Seed = Union[int, np.random.Generator, None]

NORM_TOL = 1e-6
DEFAULT_GUARD_N = 10


class InvariantViolation(RuntimeError):
    """A transform produced a state that breaks a stated invariant."""


class NormError(InvariantViolation):
    pass


@dataclass(frozen=True)
class Alphabet:
    k: int = 4

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"alphabet needs at least 2 letters, got k={self.k}")

    def __contains__(self, letter: int) -> bool:
        return 0 <= letter < self.k


def enumeration_guard() -> int:
    """Largest word length ``n`` that may be enumerated exhaustively.

    Defaults to 10; raise it with the ``RDTLAB_GUARD_N`` environment variable.
    """
    raw = os.environ.get("RDTLAB_GUARD_N")
    return int(raw) if raw else DEFAULT_GUARD_N


def check_guard(n: int) -> None:
    guard = enumeration_guard()
    if n > guard:
        raise ValueError(f"n={n} exceeds enumeration guard {guard} (set RDTLAB_GUARD_N to raise it)")


def as_word(w: WordLike, k: int = 4) -> Word:
    """Normalise ``"013"`` or ``[0, 1, 3]`` to a tuple of letters, validating each."""
    letters = tuple(int(c) for c in w)
    for a in letters:
        if not 0 <= a < k:
            raise ValueError(f"letter {a} outside alphabet of size {k}")
    return letters


def format_word(w: Iterable[int]) -> str:
    return "".join(str(int(a)) for a in w)


def word_to_index(w: WordLike, k: int = 4) -> int:
    index = 0
    for a in as_word(w, k):
        index = index * k + a
    return index


def index_to_word(index: int, n: int, k: int = 4) -> Word:
    if not 0 <= index < k**n:
        raise ValueError(f"index {index} out of range for {k}^{n} words")
    letters = []
    for _ in range(n):
        index, a = divmod(index, k)
        letters.append(a)
    return tuple(reversed(letters))


def registers_to_index(words: Sequence[WordLike], k: int = 4) -> int:
    """Index of a register tuple; the leftmost register is most significant."""
    index = 0
    for w in words:
        w = as_word(w, k)
        index = index * k ** len(w) + word_to_index(w, k)
    return index


def all_words(n: int, k: int = 4) -> np.ndarray:
    """Every word of length ``n`` as rows of a ``(k**n, n)`` array, in index order."""
    idx = np.arange(k**n, dtype=np.int64)
    powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] // powers) % k).astype(np.int64)


def words_to_indices(words: np.ndarray, k: int = 4) -> np.ndarray:
    n = words.shape[-1]
    powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return words.astype(np.int64) @ powers


def make_basis_state(index: int, dim: int) -> np.ndarray:
    if not 0 <= index < dim:
        raise ValueError(f"basis index {index} out of range for dim {dim}")
    x = np.zeros(dim)
    x[index] = 1.0
    return x


def uniform_state(dim: int) -> np.ndarray:
    return np.full(dim, 1.0 / np.sqrt(dim))


def check_normalized(x: np.ndarray, tol: float = NORM_TOL) -> float:
    """Return the norm of ``x``; raise :class:`NormError` if it is off by more than ``tol``."""
    norm = float(np.linalg.norm(x))
    if abs(norm - 1.0) > tol:
        raise NormError(f"state norm {norm!r} deviates from 1 by more than {tol}")
    return norm


def _same_dim(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")


def inner(x: np.ndarray, y: np.ndarray) -> float:
    _same_dim(x, y)
    return float(np.dot(x, y))


def distance(x: np.ndarray, y: np.ndarray) -> float:
    _same_dim(x, y)
    return float(np.linalg.norm(x - y))


def make_rng(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample(x: np.ndarray, shots: int, seed: Seed = None) -> np.ndarray:
    """Draw ``shots`` observations of ``x`` by inverse CDF over squared amplitudes."""
    check_normalized(x)
    cdf = np.cumsum(x * x)
    u = make_rng(seed).random(shots) * cdf[-1]
    out = np.searchsorted(cdf, u, side="right")
    return np.minimum(out, len(x) - 1)


def observe(x: np.ndarray, seed: Seed = None) -> int:
    """Observe ``x`` once: index ``s`` comes out with probability ``x[s]**2``."""
    return int(sample(x, 1, seed)[0])


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def walsh_hadamard(x: np.ndarray) -> np.ndarray:
    """Normalised Walsh-Hadamard transform, ``y_i = sum_j (-1)^{i.j} x_j / sqrt(N)``.

    Butterfly passes over a copy, O(N log N).
    """
    dim = x.shape[0]
    if not is_power_of_two(dim):
        raise ValueError(f"Walsh-Hadamard needs a power-of-two dimension, got {dim}")
    y = np.array(x, dtype=float, copy=True)
    h = 1
    while h < dim:
        blocks = y.reshape(-1, 2, h)
        lo = blocks[:, 0, :].copy()
        hi = blocks[:, 1, :]
        blocks[:, 0, :] += hi
        blocks[:, 1, :] = lo - hi
        h *= 2
    y /= np.sqrt(dim)
    return y


Marked = Union[Callable[[int], bool], np.ndarray, Iterable[int], slice]


def marked_index(marked: Marked, dim: int):
    """Turn a marked-set description into something numpy can index with.

    Accepts a predicate on basis indices, a boolean mask, an index collection,
    or a ``slice``.
    """
    if isinstance(marked, slice):
        return marked
    if callable(marked):
        return np.fromiter((bool(marked(i)) for i in range(dim)), dtype=bool, count=dim)
    arr = np.asarray(list(marked) if not isinstance(marked, np.ndarray) else marked)
    if arr.dtype == bool:
        if arr.shape != (dim,):
            raise ValueError("boolean mask has wrong length")
        return arr
    return arr.astype(np.int64)


def rotate_marked(x: np.ndarray, marked: Marked) -> np.ndarray:
    """Flip the sign of the amplitudes on ``marked``; everything else is untouched."""
    y = np.array(x, dtype=float, copy=True)
    y[marked_index(marked, len(y))] *= -1.0
    return y
