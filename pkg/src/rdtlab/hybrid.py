"""Divergence of the inversion computation under two oracles that differ on a pair of arguments."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .amplify import amplify_steps, uniform_on
from .search import Bijection, embed_pairs, inversion_chain
from .state import Seed, Word, WordLike, as_word, distance, make_rng, index_to_word, word_to_index


@dataclass(frozen=True)
class OraclePair:
    f: Bijection
    f_tilde: Bijection
    a: Word
    b: Word


def perturb(f: Bijection, a: WordLike, b: WordLike) -> OraclePair:
    """Swap the values of ``f`` at ``a`` and ``b``."""
    a, b = as_word(a, f.k), as_word(b, f.k)
    if a == b:
        raise ValueError("perturbation needs two distinct arguments")
    i, j = word_to_index(a, f.k), word_to_index(b, f.k)
    table = f.table.copy()
    table[i], table[j] = table[j], table[i]
    return OraclePair(f, Bijection(f.n, table, f.k), a, b)


def random_pair(n: int, seed: Seed = None, k: int = 4) -> OraclePair:
    rng = make_rng(seed)
    f = Bijection(n, rng.permutation(k**n), k)
    i, j = rng.choice(k**n, size=2, replace=False)
    return perturb(f, index_to_word(int(i), n, k), index_to_word(int(j), n, k))


@dataclass
class DivergenceStep:
    step: int
    j: int
    phase: str
    distance: float

    def as_dict(self) -> dict:
        return {"step": self.step, "j": self.j, "phase": self.phase, "distance": self.distance}


def divergence_trace(pair: OraclePair, a: WordLike) -> list[DivergenceStep]:
    """Run the inversion for ``f`` and ``f~`` side by side and log ``||x(f) - x(f~)||`` after each half-step.

    Distances are taken between the full two-register states ``|f(b), b>``.
    Row 0 is the start state; the last row compares the two final pure states.
    """
    a = as_word(a, pair.f.k)
    if a not in (pair.a, pair.b):
        raise ValueError("target must be one of the swapped arguments")
    chain = inversion_chain(pair.f, a)
    start = uniform_on(chain)
    trace = [DivergenceStep(0, 0, "start", distance(embed_pairs(pair.f, start), embed_pairs(pair.f_tilde, start)))]
    runs = zip(amplify_steps(start, chain), amplify_steps(start, inversion_chain(pair.f_tilde, a)))
    for step, ((j, phase, x), (_, _, y)) in enumerate(runs, start=1):
        d = distance(embed_pairs(pair.f, x), embed_pairs(pair.f_tilde, y))
        trace.append(DivergenceStep(step, j, phase, d))
    return trace


def mean_growth(trace: list[DivergenceStep]) -> float:
    """Average distance gained per recorded step."""
    steps = len(trace) - 1
    return (trace[-1].distance - trace[0].distance) / steps if steps else 0.0


def growth_floor(n: int, steps: int, k: int = 4) -> float:
    """Least average per-step growth that can carry ``2/sqrt(N)`` up to ``sqrt(2)`` in ``steps`` steps."""
    return (np.sqrt(2.0) - 2.0 / np.sqrt(k**n)) / steps
