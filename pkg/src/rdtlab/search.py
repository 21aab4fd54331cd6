"""Search built on diffusion: Grover iterations, verifier-chained evaluation, and inversion by nested amplification."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Union

import numpy as np

from .amplify import AmplifyWarning, SubspaceChain, build_prefix_chain, nested_amplify, purity, uniform_on
from .automaton import RuleTable, Verifier, intermediate_product
from .diffusion import Subspace, diffuse
from .pipeline import PURITY_TOL, PurityError
from .state import (
    InvariantViolation,
    Seed,
    Word,
    WordLike,
    make_rng,
    all_words,
    as_word,
    check_guard,
    format_word,
    index_to_word,
    make_basis_state,
    observe,
    uniform_state,
    walsh_hadamard,
    is_power_of_two,
    word_to_index,
    words_to_indices,
)

MAX_RETRIES = 50


@dataclass(frozen=True)
class MarkedSet:
    dim: int
    indices: np.ndarray

    @classmethod
    def from_predicate(cls, dim: int, pred: Callable[[int], bool]) -> "MarkedSet":
        return cls(dim, np.array([i for i in range(dim) if pred(i)], dtype=np.int64))

    @classmethod
    def from_indices(cls, dim: int, indices: Iterable[int]) -> "MarkedSet":
        idx = np.unique(np.asarray(list(indices), dtype=np.int64))
        if idx.size and (idx[0] < 0 or idx[-1] >= dim):
            raise ValueError("marked index out of range")
        return cls(dim, idx)

    @property
    def t(self) -> int:
        return int(self.indices.size)

    def __contains__(self, i: int) -> bool:
        return bool(np.isin(i, self.indices))


def grover_start(N: int) -> np.ndarray:
    """Uniform start state: Walsh-Hadamard of ``e_0`` when ``N`` is a power of two."""
    if is_power_of_two(N):
        return walsh_hadamard(make_basis_state(0, N))
    return uniform_state(N)


def grover(x: np.ndarray, marked: MarkedSet, iterations: int) -> tuple[np.ndarray, float]:
    """Apply ``iterations`` rounds of (negate marked, diffuse); return the state and its mass on ``marked``."""
    if marked.dim != x.shape[0]:
        raise ValueError("marked set and state dimensions differ")
    y = np.array(x, dtype=float, copy=True)
    for _ in range(iterations):
        y[marked.indices] *= -1.0
        y = diffuse(y)
    return y, float(np.sum(y[marked.indices] ** 2))


def grover_closed_form(N: int, t: int, m: int) -> float:
    theta = math.asin(math.sqrt(t / N))
    return math.sin((2 * m + 1) * theta) ** 2


def grover_iterations(N: int, t: int) -> int:
    """Iteration count maximising the closed-form success probability (first maximiser wins)."""
    if t < 1:
        raise ValueError("nothing to find: t must be at least 1")
    if t > N:
        raise ValueError(f"t={t} exceeds N={N}")
    theta = math.asin(math.sqrt(t / N))
    window = range(math.ceil(math.pi / (4 * theta)) + 2)
    return max(window, key=lambda m: (grover_closed_form(N, t, m), -m))


@dataclass
class Segment:
    anchor: Word
    result: Word
    iterations: int
    success_prob: float
    attempts: int
    queries: int


@dataclass
class Theorem1Result:
    output: Word
    query_count: int
    segments: list[Segment] = field(default_factory=list)


def theorem1_compute(
    rule: RuleTable, x0: WordLike, T: int, T1: int, seed: Seed = 0, max_retries: int = MAX_RETRIES
) -> Theorem1Result:
    """Evaluate ``f^(T)(x0)`` in ``T/T1`` Grover searches against a verifier for ``f^(T1)``.

    Each search starts uniform over all ``4**n`` words; an observed candidate is
    confirmed with one classical verifier query and the search is repeated on a miss.
    """
    k = rule.k
    w = as_word(x0, k)
    n = len(w)
    if T1 < 1 or T < 1 or T % T1:
        raise ValueError(f"T1={T1} must divide T={T}")
    check_guard(n)
    N = k**n
    oracle = Verifier(intermediate_product(rule, T1, n))
    m = grover_iterations(N, 1)
    rng = make_rng(seed)
    result = Theorem1Result(w, 0)
    for _ in range(T // T1):
        before = oracle.queries
        target = int(oracle.product.images[word_to_index(w, k)])
        for attempt in range(1, max_retries + 1):
            x = grover_start(N)
            for _ in range(m):
                oracle.flip_phase(x, w)
                x = diffuse(x)
            prob = float(x[target] ** 2)
            y = index_to_word(observe(x, rng), n, k)
            if oracle(w, y):
                break
        else:
            raise InvariantViolation(f"no verified image of {format_word(w)} after {max_retries} attempts")
        result.segments.append(Segment(w, y, m, prob, attempt, oracle.queries - before))
        w = y
    result.output = w
    result.query_count = oracle.queries
    return result


def theorem1_cost(S: int, T: int, T1: int) -> float:
    """Functional form ``S * 4**(S/2) * T / T1`` of the single-processor bound."""
    if min(S, T, T1) <= 0:
        raise ValueError("arguments must be positive")
    return S * 4 ** (S / 2) * T / T1


@dataclass(frozen=True)
class Bijection:
    """Permutation of ``k**n`` words; ``table[i]`` is the index of the image of word ``i``."""

    n: int
    table: np.ndarray
    k: int = 4

    def __post_init__(self):
        if self.table.shape != (self.k**self.n,):
            raise ValueError(f"bijection table needs {self.k ** self.n} entries")
        if not np.array_equal(np.sort(self.table), np.arange(self.k**self.n)):
            raise ValueError("table is not a bijection")

    def __call__(self, w: WordLike) -> Word:
        return index_to_word(int(self.table[word_to_index(w, self.k)]), self.n, self.k)

    def inverse(self) -> "Bijection":
        inv = np.empty_like(self.table)
        inv[self.table] = np.arange(self.table.size)
        return Bijection(self.n, inv, self.k)

    def __eq__(self, other):
        if not isinstance(other, Bijection):
            return NotImplemented
        return (self.n, self.k) == (other.n, other.k) and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash((self.n, self.k, self.table.tobytes()))


def identity_bijection(n: int, k: int = 4) -> Bijection:
    return Bijection(n, np.arange(k**n), k)


def random_bijection(n: int, seed: Seed = None, k: int = 4) -> Bijection:
    check_guard(n)
    return Bijection(n, make_rng(seed).permutation(k**n), k)


def bijection_from_function(n: int, fn: Callable[[Word], WordLike], k: int = 4) -> Bijection:
    images = np.array([as_word(fn(tuple(int(a) for a in w)), k) for w in all_words(n, k)])
    return Bijection(n, words_to_indices(images, k), k)


def dump_bijection(f: Bijection) -> str:
    return "".join(
        f"{format_word(index_to_word(i, f.n, f.k))} -> {format_word(index_to_word(int(j), f.n, f.k))}\n"
        for i, j in enumerate(f.table)
    )


def parse_bijection(text: str, k: int = 4) -> Bijection:
    pairs = []
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        try:
            lhs, rhs = (part.strip() for part in ln.split("->"))
        except ValueError:
            raise ValueError(f"malformed bijection line {ln!r}") from None
        pairs.append((as_word(lhs, k), as_word(rhs, k)))
    if not pairs:
        raise ValueError("empty bijection file")
    n = len(pairs[0][0])
    if any(len(a) != n or len(b) != n for a, b in pairs):
        raise ValueError("all words in a bijection file must share one length")
    table = np.full(k**n, -1, dtype=np.int64)
    for a, b in pairs:
        i = word_to_index(a, k)
        if table[i] != -1:
            raise ValueError(f"duplicate input {format_word(a)}")
        table[i] = word_to_index(b, k)
    if np.any(table < 0):
        raise ValueError("bijection file does not cover every input word")
    return Bijection(n, table, k)


def load_bijection(path: Union[str, Path]) -> Bijection:
    return parse_bijection(Path(path).read_text())


def embed_pairs(f: Bijection, x: np.ndarray) -> np.ndarray:
    """Lift a vector indexed by ``b`` to the two-register basis ``|f(b), b>`` of dimension ``k**(2n)``."""
    N = f.k**f.n
    full = np.zeros(N * N)
    full[f.table * N + np.arange(N)] = x
    return full


def inversion_chain(f: Bijection, a: WordLike) -> SubspaceChain:
    """Prefix chain on the argument register; it depends on ``a`` but not on ``f``."""
    if f.k != 4:
        raise ValueError("inversion by nested amplification needs a 4-letter alphabet")
    a = as_word(a, f.k)
    if len(a) != f.n:
        raise ValueError(f"argument has length {len(a)}, expected {f.n}")
    return build_prefix_chain(a, f.k)


@dataclass
class Inversion:
    value: Word
    amplitude: float
    state: np.ndarray


def invert(f: Bijection, a: WordLike) -> Inversion:
    chain = inversion_chain(f, a)
    final, _ = nested_amplify(uniform_on(chain), chain)
    winner, amp = purity(final)
    if abs(amp - 1.0) > PURITY_TOL:
        raise PurityError(f"inversion ended with peak amplitude {amp!r}")
    return Inversion(index_to_word(int(f.table[winner]), f.n, f.k), amp, final)


def invert_function(f: Bijection, a: WordLike) -> Word:
    """Read ``f(a)`` off ``(1/2^n) sum_b |f(b), b>`` by amplifying onto ``b = a``."""
    return invert(f, a).value


def designated_word(n: int) -> Word:
    """The word playing the role of "1": all zeros except a final 1."""
    return (0,) * (n - 1) + (1,)


@dataclass
class UniqueSolution:
    observed: Word
    solution: Word
    success_prob: float
    chain_sizes: list[int]
    state: np.ndarray = field(repr=False)


def unique_chain(images: np.ndarray, n: int, k: int = 4) -> tuple[SubspaceChain, int]:
    """Levels ``B_m`` = words with ``m`` leading zeros, plus the unique solution."""
    hits = np.flatnonzero(images == word_to_index(designated_word(n), k))
    if hits.size == 0:
        raise ValueError("equation has no solution")
    if hits.size > 1:
        raise ValueError(f"equation has {hits.size} solutions; exactly one is required")
    star = int(hits[0])
    dim = k**n
    levels = []
    for m in range(n + 1):
        block = np.arange(k ** (n - m))
        levels.append(Subspace.from_indices(dim, np.union1d(block, [star])))
    return SubspaceChain(tuple(levels), k), star


def solve_unique(f: Callable[[Word], WordLike], n: int, seed: Seed = 0, k: int = 4) -> UniqueSolution:
    """Find the unique ``x`` with ``f(x)`` equal to :func:`designated_word`.

    The chain is off by at most one element per level from the regular one,
    so the result is probabilistic; the exact mass on the solution is reported.
    """
    if k != 4:
        raise ValueError("unique-solution search is defined for a 4-letter alphabet")
    check_guard(n)
    if isinstance(f, Bijection):
        images = f.table
    else:
        outs = np.array([as_word(f(tuple(int(a) for a in w)), k) for w in all_words(n, k)])
        if outs.shape != (k**n, n):
            raise ValueError("oracle must map words of length n to words of length n")
        images = words_to_indices(outs, k)
    chain, star = unique_chain(images, n, k)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AmplifyWarning)
        final, _ = nested_amplify(uniform_on(chain), chain)
    observed = index_to_word(observe(final, seed), n, k)
    return UniqueSolution(observed, index_to_word(star, n, k), float(final[star] ** 2), chain.sizes, final)
