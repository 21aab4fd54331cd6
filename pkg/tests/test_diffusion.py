import numpy as np
import pytest

from rdtlab.diffusion import (
    Subspace,
    average_amplitude,
    diffuse,
    diffuse_via_walsh,
    diffusion_matrix,
    rdt,
    rotation_matrix,
    walsh_matrix,
)
from rdtlab.state import make_basis_state, uniform_state


def relative_matrix(N, members):
    """Dense RDT built entry by entry: inversion about average on the member block, identity elsewhere."""
    M = len(members)
    d = np.eye(N)
    for i in members:
        for j in members:
            d[i, j] = 2.0 / M - (1.0 if i == j else 0.0)
    return d


def random_state(rng, N):
    x = rng.normal(size=N)
    return x / np.linalg.norm(x)


def test_subspace_constructors_agree():
    by_pred = Subspace.from_predicate(16, lambda i: 4 <= i < 8)
    by_range = Subspace.from_range(16, 4, 8)
    assert by_pred.size == by_range.size == 4
    assert by_pred.index == slice(4, 8)
    scattered = Subspace.from_indices(16, [1, 5, 9])
    assert scattered.size == 3 and scattered.member(5) and not scattered.member(6)
    assert Subspace.from_mask(scattered.mask()).members().tolist() == [1, 5, 9]


def test_subspace_rejects_empty():
    with pytest.raises(ValueError):
        Subspace.from_indices(4, [])
    with pytest.raises(ValueError):
        Subspace.from_range(4, 2, 2)


def test_average_amplitude_examples():
    assert average_amplitude(uniform_state(4), Subspace.full(4)) == pytest.approx(0.5, abs=1e-15)
    x = np.array([0.6, 0.8, 0.0, 0.0])
    assert average_amplitude(x, Subspace.from_indices(4, [0, 1])) == pytest.approx(0.7, abs=1e-15)


def test_diffuse_examples():
    for N in (2, 5, 16):
        u = uniform_state(N)
        assert np.allclose(diffuse(u), u, atol=1e-15)
    y = diffuse(make_basis_state(0, 4))
    assert np.allclose(y, [-0.5, 0.5, 0.5, 0.5], atol=1e-15)
    assert np.allclose(y, diffusion_matrix(4) @ make_basis_state(0, 4), atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_diffuse_is_involution(seed):
    x = random_state(np.random.default_rng(seed), 32)
    assert np.max(np.abs(diffuse(diffuse(x)) - x)) < 1e-12


def test_rdt_examples():
    rng = np.random.default_rng(0)
    x = random_state(rng, 8)
    assert np.allclose(rdt(x, Subspace.full(8)), diffuse(x), atol=1e-15)
    e0 = make_basis_state(0, 4)
    assert np.array_equal(rdt(e0, Subspace.from_indices(4, [0])), e0)
    y = rdt(np.array([0.6, 0.8, 0.0, 0.0]), Subspace.from_indices(4, [0, 1]))
    assert np.allclose(y, [0.8, 0.6, 0.0, 0.0], atol=1e-15)


@pytest.mark.parametrize("seed", range(20))
def test_rdt_matches_dense_block_matrix(seed):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(2, 33))
    members = np.sort(rng.choice(N, size=int(rng.integers(1, N + 1)), replace=False))
    x = random_state(rng, N)
    expected = relative_matrix(N, members) @ x
    assert np.max(np.abs(rdt(x, Subspace.from_indices(N, members)) - expected)) < 1e-12


def test_rdt_rejects_mismatched_dim():
    with pytest.raises(ValueError):
        rdt(np.ones(4) / 2, Subspace.full(8))


@pytest.mark.parametrize("seed", range(10))
def test_inversion_about_average_identities(seed):
    rng = np.random.default_rng(seed)
    N = 64
    x = random_state(rng, N)
    avg = x.mean()
    assert np.max(np.abs((x - avg) + (diffuse(x) - avg))) < 1e-12

    members = rng.choice(N, size=int(rng.integers(1, N + 1)), replace=False)
    s = Subspace.from_indices(N, members)
    y = rdt(x, s)
    sub_avg = x[s.index].mean()
    assert np.max(np.abs((x[s.index] - sub_avg) + (y[s.index] - sub_avg))) < 1e-12
    outside = ~s.mask()
    assert np.array_equal(y[outside], x[outside])


@pytest.mark.parametrize("N", [4, 17, 64, 256])
def test_rdt_orthogonal_and_involutive_for_every_size(N):
    rng = np.random.default_rng(N)
    sizes = range(1, N + 1) if N <= 64 else rng.choice(np.arange(1, N + 1), 40, replace=False)
    for M in sizes:
        s = Subspace.from_indices(N, rng.choice(N, size=int(M), replace=False))
        x = random_state(rng, N)
        y = rdt(x, s)
        assert abs(np.linalg.norm(y) - 1.0) < 1e-12
        assert np.max(np.abs(rdt(y, s) - x)) < 1e-12


def test_diffusion_matrix_examples():
    assert np.array_equal(diffusion_matrix(2), [[0.0, 1.0], [1.0, 0.0]])
    assert np.allclose(np.diag(diffusion_matrix(4)), -0.5, atol=0)
    with pytest.raises(ValueError):
        diffusion_matrix(6)
    with pytest.raises(ValueError):
        diffusion_matrix(2**11)


@pytest.mark.parametrize("N", [2, 4, 8, 16])
def test_diffusion_factorises_through_walsh(N):
    W, R = walsh_matrix(N), rotation_matrix(N)
    assert np.max(np.abs(diffusion_matrix(N) - W @ R @ W)) < 1e-12
    x = random_state(np.random.default_rng(N), N)
    assert np.max(np.abs(diffuse_via_walsh(x) - diffuse(x))) < 1e-12
