"""Nested DFT operators: unitarity, Kronecker identity, structured path."""

import math

import numpy as np
import pytest

from qfuca.transforms import (apply_modulation, block_idft, idft_matrix,
                              kronecker_chain, nested_modulation)


def test_idft_order_1():
    assert np.allclose(idft_matrix(1), [[1.0]])


def test_idft_order_2():
    want = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    assert np.allclose(idft_matrix(2), want)


def test_idft_order_4_column():
    f = idft_matrix(4)
    assert np.allclose(f[:, 1], np.array([1, 1j, -1, -1j]) / 2)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 7, 16])
def test_idft_unitary_and_symmetric(k):
    f = idft_matrix(k)
    assert np.allclose(f, f.T)
    assert np.linalg.norm(f.conj().T @ f - np.eye(k)) < 1e-12


def test_idft_rejects_zero():
    with pytest.raises(ValueError):
        idft_matrix(0)


def test_block_idft_level_1_is_plain():
    assert np.allclose(block_idft(1, (4, 2)), idft_matrix(4))


def test_block_idft_level_2_2x2():
    w = block_idft(2, (2, 2))
    f = idft_matrix(2)
    want = np.kron(f, np.eye(2))
    assert np.allclose(w, want)
    # explicit block pattern: identity blocks scaled by +-1/sqrt(2)
    s = 1 / math.sqrt(2)
    assert np.allclose(w[:2, :2], s * np.eye(2))
    assert np.allclose(w[2:, 2:], -s * np.eye(2))


def test_block_idft_unitary_3_4_2():
    dims = (3, 4, 2)
    for level in (1, 2, 3):
        w = block_idft(level, dims)
        assert np.linalg.norm(w.conj().T @ w - np.eye(w.shape[0])) < 1e-12


def test_nested_1d_base_case():
    nm = nested_modulation((5,))
    assert np.allclose(nm.matrix, idft_matrix(5))
    with pytest.raises(ValueError):
        nested_modulation((5,), np.eye(5))


@pytest.mark.parametrize("dims", [(2, 2), (2, 2, 2), (3, 2), (2, 3, 2), (4, 4)])
def test_nested_equals_kronecker_chain(dims):
    nm = nested_modulation(dims)
    assert np.max(np.abs(nm.matrix - kronecker_chain(dims))) < 1e-12


def test_nested_unitary_with_precoder():
    rng = np.random.default_rng(5)
    dims = (3, 2, 4)
    m = 6
    qs = []
    for _ in range(4):
        a = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        q, _ = np.linalg.qr(a)
        qs.append(q)
    nm = nested_modulation(dims, qs)
    w = nm.matrix
    assert np.linalg.norm(w.conj().T @ w - np.eye(24)) < 1e-10


def test_precoder_shape_checks():
    with pytest.raises(ValueError):
        nested_modulation((2, 2), np.eye(3))
    with pytest.raises(ValueError):
        nested_modulation((2, 2), 2.0 * np.eye(2))   # not unitary


def test_apply_dc_mode_gives_uniform_beam():
    dims = (3, 4)
    nm = nested_modulation(dims)
    s = np.zeros(12)
    s[0] = 1.0
    x = apply_modulation(nm, s)
    assert np.allclose(x, np.full(12, 1 / math.sqrt(12)))


def test_apply_single_ring_helical_phase():
    nm = nested_modulation((4,))
    s = np.zeros(4)
    s[1] = 1.0
    x = apply_modulation(nm, s)
    k = np.arange(4)
    assert np.allclose(x, np.exp(2j * np.pi * k / 4) / 2)


def test_apply_zero_and_length_check():
    nm = nested_modulation((2, 3))
    assert np.allclose(apply_modulation(nm, np.zeros(6)), 0)
    with pytest.raises(ValueError):
        apply_modulation(nm, np.zeros(5))


@pytest.mark.parametrize("dims", [(8,), (2, 3), (4, 2, 2), (2, 2, 2, 2), (3, 3, 3)])
def test_parseval(dims):
    rng = np.random.default_rng(11)
    nm = nested_modulation(dims)
    n = nm.n_modes
    for _ in range(5):
        s = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        x = apply_modulation(nm, s)
        assert math.isclose(np.linalg.norm(x), np.linalg.norm(s), rel_tol=1e-10)


def test_structured_matches_dense_100_draws():
    rng = np.random.default_rng(23)
    cases = [(6,), (2, 3), (4, 4), (2, 2, 2), (3, 2, 4), (2, 2, 2, 2)]
    draws = 0
    for dims in cases:
        m = math.prod(dims[:-1])
        if len(dims) >= 2:
            qs = []
            for _ in range(dims[-1]):
                a = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
                q, _ = np.linalg.qr(a)
                qs.append(q)
            variants = [nested_modulation(dims), nested_modulation(dims, qs)]
        else:
            variants = [nested_modulation(dims)]
        for nm in variants:
            for _ in range(10):
                s = rng.standard_normal(nm.n_modes) + 1j * rng.standard_normal(nm.n_modes)
                dense = apply_modulation(nm, s)
                fast = apply_modulation(nm, s, structured=True)
                assert np.linalg.norm(dense - fast) <= 1e-10 * np.linalg.norm(dense)
                draws += 1
    assert draws >= 100


def test_demodulation_inverts_modulation():
    nm = nested_modulation((3, 4))
    w = nm.matrix
    assert np.linalg.norm(nm.demodulation_matrix() @ w - np.eye(12)) < 1e-12
