"""Nested-subspace amplification: rotate B_j, then diffuse relative to B_{j-1}, for j = 1..n."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .diffusion import Subspace, rdt_
from .state import NormError, WordLike, as_word, word_to_index

TRACE_NORM_TOL = 1e-10


class AmplifyWarning(UserWarning):
    """The start state or chain falls outside the regime the amplitude formula covers."""


@dataclass(frozen=True)
class SubspaceChain:
    """Nested basis subsets ``levels[0] ⊇ levels[1] ⊇ ... ⊇ levels[n]``."""

    levels: tuple[Subspace, ...]
    k: int = 4

    def __post_init__(self):
        if len(self.levels) < 2:
            raise ValueError("a chain needs at least two levels")
        dims = {s.dim for s in self.levels}
        if len(dims) != 1:
            raise ValueError("all chain levels must live in the same space")
        for outer, inner_ in zip(self.levels, self.levels[1:]):
            if not inner_.issubset(outer):
                raise ValueError("chain levels are not nested")

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def dim(self) -> int:
        return self.levels[0].dim

    @property
    def sizes(self) -> list[int]:
        return [s.size for s in self.levels]

    def is_regular(self) -> bool:
        """True when ``|B_j| = k**(n - j)`` at every level."""
        n = self.depth
        return all(size == self.k ** (n - j) for j, size in enumerate(self.sizes))


def build_prefix_chain(target: WordLike, k: int = 4) -> SubspaceChain:
    """Chain over all ``k**n`` words: ``B_j`` holds the words sharing ``target``'s first ``j`` letters.

    With the leftmost letter most significant every level is a contiguous index range.
    """
    target = as_word(target, k)
    n = len(target)
    if n == 0:
        raise ValueError("target word must be non-empty")
    dim = k**n
    levels = []
    for j in range(n + 1):
        block = k ** (n - j)
        prefix = word_to_index(target[:j], k) if j else 0
        levels.append(Subspace.from_range(dim, prefix * block, (prefix + 1) * block))
    return SubspaceChain(tuple(levels), k)


def predicted_amplitude(j: int, k: int, n: int) -> float:
    """Amplitude on each member of ``B_j`` after ``j`` rounds from a uniform start."""
    return (3.0 - 4.0 / k) ** j / k ** (n / 2.0)


@dataclass
class TraceStep:
    j: int
    target_amp: float
    target_spread: float
    residual: float
    norm: float

    def as_dict(self) -> dict:
        return {"j": self.j, "target_amp": self.target_amp, "residual": self.residual, "norm": self.norm}


@dataclass
class TraceRecord:
    steps: list[TraceStep] = field(default_factory=list)
    pairs_applied: int = 0

    @property
    def final(self) -> TraceStep:
        return self.steps[-1]

    def target_amplitudes(self) -> list[float]:
        return [s.target_amp for s in self.steps]


def _record(x: np.ndarray, chain: SubspaceChain, j: int) -> TraceStep:
    level = chain.levels[j]
    block = x[level.index]
    if j == 0:
        residual = 0.0
    else:
        ring = chain.levels[j - 1].mask()
        ring[level.index] = False
        residual = float(np.max(np.abs(x[ring]))) if ring.any() else 0.0
    norm = float(np.linalg.norm(x))
    if abs(norm - 1.0) > TRACE_NORM_TOL:
        raise NormError(f"norm drifted to {norm!r} at step {j}")
    return TraceStep(j, float(block.mean()), float(block.max() - block.min()), residual, norm)


def check_start(x: np.ndarray, chain: SubspaceChain) -> bool:
    """Warn unless ``x`` is uniform over ``B_0`` and zero elsewhere, and the chain is regular."""
    if x.shape[0] != chain.dim:
        raise ValueError(f"state dim {x.shape[0]} does not match chain dim {chain.dim}")
    b0 = chain.levels[0]
    expected = 1.0 / np.sqrt(b0.size)
    outside = x.copy()
    outside[b0.index] = 0.0
    ok = bool(np.allclose(x[b0.index], expected, atol=1e-12, rtol=0) and not np.any(outside))
    if not ok:
        warnings.warn("start state is not uniform over B_0", AmplifyWarning, stacklevel=3)
    if not chain.is_regular():
        warnings.warn(f"chain sizes {chain.sizes} are not powers k^(n-j)", AmplifyWarning, stacklevel=3)
        ok = False
    return ok


def amplify_steps(x: np.ndarray, chain: SubspaceChain) -> Iterator[tuple[int, str, np.ndarray]]:
    """Run the rounds on a copy of ``x``, yielding ``(j, phase, state)`` after every half-step.

    ``phase`` is ``"rotate"`` or ``"rdt"``. The yielded array is the live buffer;
    copy it if you need to keep it.
    """
    y = np.array(x, dtype=float, copy=True)
    for j in range(1, chain.depth + 1):
        y[chain.levels[j].index] *= -1.0
        yield j, "rotate", y
        rdt_(y, chain.levels[j - 1])
        yield j, "rdt", y


def nested_amplify(x: np.ndarray, chain: SubspaceChain) -> tuple[np.ndarray, TraceRecord]:
    check_start(x, chain)
    trace = TraceRecord()
    trace.steps.append(_record(x, chain, 0))
    y = x
    for j, phase, y in amplify_steps(x, chain):
        if phase == "rdt":
            trace.pairs_applied += 1
            trace.steps.append(_record(y, chain, j))
    return np.array(y, copy=True), trace


def uniform_on(chain: SubspaceChain) -> np.ndarray:
    """Uniform state over ``B_0`` of the chain."""
    x = np.zeros(chain.dim)
    b0 = chain.levels[0]
    x[b0.index] = 1.0 / np.sqrt(b0.size)
    return x


def purity(x: np.ndarray) -> tuple[int, float]:
    """Index and magnitude of the largest amplitude."""
    i = int(np.argmax(np.abs(x)))
    return i, float(abs(x[i]))


def level_amplitudes(x: np.ndarray, chain: SubspaceChain, j: int) -> np.ndarray:
    return x[chain.levels[j].index]


def chain_from_masks(masks: Sequence[np.ndarray], k: int = 4) -> SubspaceChain:
    return SubspaceChain(tuple(Subspace.from_mask(m) for m in masks), k)
