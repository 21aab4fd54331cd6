"""Inversion about the average, globally and relative to a subspace spanned by basis vectors."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Union

import numpy as np

from .state import is_power_of_two, walsh_hadamard

MAX_MATRIX_DIM = 2**10


@dataclass(frozen=True)
class Subspace:
    """Span of a subset of basis vectors of a ``dim``-dimensional space.

    Membership is held either as a contiguous ``[start, stop)`` range (the
    cheap case, produced by prefix constraints) or as a sorted index array.
    """

    dim: int
    start: int = 0
    stop: int = 0
    indices: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.size < 1 or self.size > self.dim:
            raise ValueError(f"subspace size {self.size} must lie in 1..{self.dim}")
        if self.indices is None and not 0 <= self.start < self.stop <= self.dim:
            raise ValueError(f"range [{self.start}, {self.stop}) outside 0..{self.dim}")

    @classmethod
    def full(cls, dim: int) -> "Subspace":
        return cls(dim, 0, dim)

    @classmethod
    def from_range(cls, dim: int, start: int, stop: int) -> "Subspace":
        return cls(dim, start, stop)

    @classmethod
    def from_indices(cls, dim: int, indices: Iterable[int]) -> "Subspace":
        idx = np.unique(np.asarray(list(indices), dtype=np.int64))
        if idx.size and (idx[0] < 0 or idx[-1] >= dim):
            raise ValueError("subspace index out of range")
        if idx.size and idx[-1] - idx[0] + 1 == idx.size:
            return cls(dim, int(idx[0]), int(idx[-1]) + 1)
        return cls(dim, indices=idx)

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "Subspace":
        return cls.from_indices(len(mask), np.flatnonzero(mask))

    @classmethod
    def from_predicate(cls, dim: int, member: Callable[[int], bool]) -> "Subspace":
        return cls.from_indices(dim, (i for i in range(dim) if member(i)))

    @property
    def size(self) -> int:
        if self.indices is not None:
            return int(self.indices.size)
        return self.stop - self.start

    @property
    def index(self) -> Union[slice, np.ndarray]:
        """Numpy index selecting the member coordinates."""
        if self.indices is None:
            return slice(self.start, self.stop)
        return self.indices

    def member(self, i: int) -> bool:
        if self.indices is None:
            return self.start <= i < self.stop
        pos = np.searchsorted(self.indices, i)
        return bool(pos < self.indices.size and self.indices[pos] == i)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.dim, dtype=bool)
        m[self.index] = True
        return m

    def members(self) -> np.ndarray:
        if self.indices is None:
            return np.arange(self.start, self.stop)
        return self.indices

    def issubset(self, other: "Subspace") -> bool:
        return bool(np.all(other.mask()[self.index]))


def _check_dim(x: np.ndarray, s: Subspace) -> None:
    if x.shape[0] != s.dim:
        raise ValueError(f"state dim {x.shape[0]} does not match subspace dim {s.dim}")


def average_amplitude(x: np.ndarray, s: Subspace) -> float:
    _check_dim(x, s)
    return float(np.mean(x[s.index]))


def diffuse(x: np.ndarray) -> np.ndarray:
    """Global diffusion ``D = 2P - I``: every amplitude is reflected about the mean."""
    return 2.0 * np.mean(x) - x


def rdt_(x: np.ndarray, s: Subspace) -> np.ndarray:
    """In-place relative diffusion over ``s``; returns ``x``."""
    _check_dim(x, s)
    idx = s.index
    block = x[idx]
    x[idx] = 2.0 * block.mean() - block
    return x


def rdt(x: np.ndarray, s: Subspace) -> np.ndarray:
    """Relative diffusion transform over ``s``.

    Member amplitudes are reflected about their own mean; non-members pass
    through unchanged. Two passes, O(dim).
    """
    return rdt_(np.array(x, dtype=float, copy=True), s)


def diffusion_matrix(N: int) -> np.ndarray:
    if not is_power_of_two(N):
        raise ValueError(f"N must be a power of two, got {N}")
    if N > MAX_MATRIX_DIM:
        raise ValueError(f"N={N} too large for a dense matrix (limit {MAX_MATRIX_DIM})")
    return np.full((N, N), 2.0 / N) - np.eye(N)


def walsh_matrix(N: int) -> np.ndarray:
    """Dense Walsh-Hadamard matrix built entrywise from bit parities."""
    if not is_power_of_two(N) or N > MAX_MATRIX_DIM:
        raise ValueError(f"bad Walsh matrix size {N}")
    i = np.arange(N)
    parity = np.vectorize(lambda v: bin(v).count("1") & 1)(i[:, None] & i[None, :])
    return np.where(parity == 1, -1.0, 1.0) / np.sqrt(N)


def rotation_matrix(N: int) -> np.ndarray:
    """``diag(1, -1, ..., -1)``: fixes e_0, negates the rest."""
    r = -np.eye(N)
    r[0, 0] = 1.0
    return r


def diffuse_via_walsh(x: np.ndarray) -> np.ndarray:
    """``W R W x`` applied matrix-free; agrees with :func:`diffuse`."""
    y = walsh_hadamard(x)
    y[1:] *= -1.0
    return walsh_hadamard(y)
