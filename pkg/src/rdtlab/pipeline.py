"""Multiprocessor evaluation of ``F = f^(T)``: T1 processors, each advancing the computation by T2 steps.

Each processor's three registers ``|first, a, f^(T2)(a)>`` are stored in the
restricted basis indexed by the middle word ``a``. The first register is a
classical label and the last register is a lookup table over ``a``, so the
amplitude vector has ``k**n`` entries rather than ``k**(3n)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .amplify import build_prefix_chain, nested_amplify, purity
from .automaton import RuleTable, iterate, iterate_all
from .state import InvariantViolation, Word, WordLike, as_word, check_guard, index_to_word, word_to_index

PURITY_TOL = 1e-8


class PurityError(InvariantViolation):
    """Amplification finished without concentrating on a single basis state."""


@dataclass(frozen=True)
class PipelineConfig:
    n: int
    rule: RuleTable
    x0: Word
    T: int
    T1: int

    def __post_init__(self):
        object.__setattr__(self, "x0", as_word(self.x0, self.rule.k))
        if len(self.x0) != self.n:
            raise ValueError(f"x0 has length {len(self.x0)}, expected n={self.n}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.T < 1 or self.T1 < 1:
            raise ValueError("T and T1 must be positive")
        if self.T % self.T1:
            raise ValueError(f"T1={self.T1} does not divide T={self.T}")
        check_guard(self.n)

    @property
    def T2(self) -> int:
        return self.T // self.T1


@dataclass
class ProcessorState:
    id: int
    n: int
    k: int
    amplitudes: np.ndarray
    last: np.ndarray = field(repr=False)
    first: Optional[Word] = None

    @property
    def first_register(self) -> Word:
        return self.first if self.first is not None else (0,) * self.n

    def last_register(self, a: WordLike) -> Word:
        return index_to_word(int(self.last[word_to_index(a, self.k)]), self.n, self.k)


def prepare_x0(config: PipelineConfig, processor_id: int = 1) -> ProcessorState:
    """Uniform superposition over ``a`` with ``f^(T2)(a)`` written into the last register."""
    n, k = config.n, config.rule.k
    last = iterate_all(config.rule, n, config.T2)
    amps = np.full(k**n, 1.0 / np.sqrt(k**n))
    return ProcessorState(processor_id, n, k, amps, last)


def inject_target(p: ProcessorState, w: WordLike) -> ProcessorState:
    if p.first is not None:
        raise ValueError(f"processor {p.id} already holds {p.first}; inject needs the fresh X0 form")
    return ProcessorState(p.id, p.n, p.k, p.amplitudes, p.last, as_word(w, p.k))


@dataclass
class Round:
    processor: int
    injected: Word
    returned: Word
    amplitude: float
    max_residual: float


def _advance(p: ProcessorState) -> Round:
    if p.first is None:
        raise ValueError(f"processor {p.id} has no target injected")
    chain = build_prefix_chain(p.first, p.k)
    final, _ = nested_amplify(p.amplitudes, chain)
    winner, amp = purity(final)
    if abs(amp - 1.0) > PURITY_TOL:
        raise PurityError(f"processor {p.id} ended with peak amplitude {amp!r}")
    rest = np.abs(np.delete(final, winner))
    residual = float(rest.max()) if rest.size else 0.0
    returned = index_to_word(int(p.last[winner]), p.n, p.k)
    return Round(p.id, p.first, returned, amp, residual)


def advance(p: ProcessorState) -> Word:
    """Amplify onto ``a = first register`` and read the last register of the resulting pure state."""
    return _advance(p).returned


def logical_cost(T: int, T1: int, n: int) -> int:
    """Parallel preparation (T2 steps) plus T1 rounds of n rotate/diffuse pairs charged n each."""
    return T // T1 + T1 * n * n


def cost_model(T: int, T1: float, n: int, a: float = 1.0, b: float = 1.0) -> float:
    return a * T / T1 + 2.0 * b * n * n * T1


def optimal_t1(T: int, n: int, a: float = 1.0, b: float = 1.0) -> int:
    """Processor count minimising :func:`cost_model`, clamped to ``[1, T]``.

    The cost is convex in T1, so the integer optimum is the floor or ceiling
    of the stationary point ``sqrt(aT / 2b) / n``.
    """
    if T < 1 or n < 1 or a <= 0 or b <= 0:
        raise ValueError("need T, n >= 1 and a, b > 0")
    star = math.sqrt(a * T / (2.0 * b)) / n
    candidates = {min(max(c, 1), T) for c in (math.floor(star), math.ceil(star), round(star))}
    return min(sorted(candidates), key=lambda c: (cost_model(T, c, n, a, b), abs(c - star)))


@dataclass
class PipelineReport:
    config: PipelineConfig
    rounds: list[Round]
    output: Word
    cost: int

    @property
    def certain(self) -> bool:
        return all(abs(r.amplitude - 1.0) <= PURITY_TOL for r in self.rounds)


def run_pipeline(config: PipelineConfig) -> PipelineReport:
    """Prepare T1 processors, then hand the running word from each to the next.

    Round ``i`` starts from ``f^((i-1) T2)(x0)`` and returns ``f^(i T2)(x0)``;
    the last round returns ``F(x0) = f^(T)(x0)``.
    """
    processors = [prepare_x0(config, i + 1) for i in range(config.T1)]
    w = config.x0
    rounds = []
    for p in processors:
        r = _advance(inject_target(p, w))
        rounds.append(r)
        w = r.returned
    return PipelineReport(config, rounds, w, logical_cost(config.T, config.T1, config.n))


def classical_output(config: PipelineConfig) -> Word:
    return iterate(config.rule, config.x0, config.T)
