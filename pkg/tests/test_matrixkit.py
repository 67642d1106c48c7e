import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gfvnet import matrixkit as mk
from gfvnet.errors import DimensionError

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def mats(rows, cols):
    return arrays(float, (rows, cols), elements=finite)


def test_kron_identity():
    np.testing.assert_array_equal(mk.kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_scalar_factor():
    np.testing.assert_array_equal(mk.kron([[0, 1], [1, 0]], [[2]]), [[0, 2], [2, 0]])


def test_kron_selector_column():
    Bh = np.array([[0.0], [0.0], [0.0], [1.0]])
    out = mk.kron(np.array([[1.0], [0.0], [0.0], [0.0]]), Bh)
    assert out.shape == (16, 1)
    np.testing.assert_array_equal(out[:4], Bh)
    assert not out[4:].any()


@given(st.data())
def test_kron_block_layout(data):
    r1, c1, r2, c2 = (data.draw(st.integers(1, 3)) for _ in range(4))
    A = data.draw(mats(r1, c1))
    B = data.draw(mats(r2, c2))
    K = mk.kron(A, B)
    assert K.shape == (r1 * r2, c1 * c2)
    for i in range(r1):
        for j in range(c1):
            np.testing.assert_array_equal(K[i * r2:(i + 1) * r2, j * c2:(j + 1) * c2], A[i, j] * B)


@given(finite, mats(2, 3), mats(3, 2))
def test_kron_bilinear(alpha, A, B):
    np.testing.assert_allclose(mk.kron(alpha * A, B), alpha * mk.kron(A, B), atol=1e-12)


@given(mats(2, 3), mats(3, 2), mats(3, 4), mats(2, 2))
def test_mixed_product(A, B, C, D):
    np.testing.assert_allclose(mk.kron(A, B) @ mk.kron(C, D), mk.kron(A @ C, B @ D),
                               rtol=1e-10, atol=1e-8)


def test_eigenvalues_examples():
    assert mk.matched_distance(mk.eigenvalues(np.diag([-1.0, -2.0])), [-1, -2]) < 1e-14
    assert mk.matched_distance(mk.eigenvalues([[0, 1], [-1, 0]]), [1j, -1j]) < 1e-14
    den = [1, 4, -7, -10, 0]
    assert mk.matched_distance(mk.eigenvalues(mk.companion(den)), [0, 2, -1, -5]) < 1e-12


def test_eigenvalues_non_square():
    with pytest.raises(DimensionError):
        mk.eigenvalues(np.zeros((2, 3)))
    with pytest.raises(DimensionError):
        mk.is_hurwitz(np.zeros((2, 3)))


@settings(max_examples=50)
@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_triangular_spectrum_is_diagonal(n, seed):
    rng = np.random.default_rng(seed)
    T = np.triu(rng.standard_normal((n, n)))
    assert mk.matched_distance(mk.eigenvalues(T), np.diag(T)) < 1e-10


def test_hurwitz_examples():
    assert mk.is_hurwitz(np.diag([-1.0, -2.0]))
    assert not mk.is_hurwitz([[0, 1], [-1, 0]])
    assert not mk.is_hurwitz(mk.companion([1, 4, -7, -10, 0]))
    assert not mk.is_hurwitz(np.diag([-1.0, -2.0]), margin=1.5)


def test_hurwitz_agrees_with_abscissa():
    rng = np.random.default_rng(7)
    for _ in range(500):
        n = int(rng.integers(1, 7))
        M = rng.standard_normal((n, n)) - rng.uniform(0, 2) * np.eye(n)
        assert mk.is_hurwitz(M, 0) == (np.max(np.linalg.eigvals(M).real) < 0)


def test_rank_examples(mimo_counterexample):
    from gfvnet.agents import ctrb
    from gfvnet.network import assemble
    assert mk.numerical_rank(np.eye(3)) == 3
    assert mk.numerical_rank(np.zeros((2, 2))) == 0
    lifted = assemble(mimo_counterexample.agent, mimo_counterexample.structure)
    assert mk.numerical_rank(ctrb(lifted.calA, lifted.calB)) == 5


def test_krylov_basis_matches_kalman_rank_on_well_scaled_pairs():
    from gfvnet.agents import ctrb
    rng = np.random.default_rng(3)
    for _ in range(100):
        N = int(rng.integers(1, 6))
        A = rng.standard_normal((N, N)) / np.sqrt(N)
        B = rng.standard_normal((N, int(rng.integers(1, 3))))
        if rng.random() < 0.5:
            B[:] = 0
            B[0] = 1.0
            A[0, 1:] = 0.0  # e_1 becomes an eigenvector; span stays {e_1}
        Q = mk.krylov_basis(A, B)
        np.testing.assert_allclose(Q.T @ Q, np.eye(Q.shape[1]), atol=1e-12)
        assert Q.shape[1] == mk.numerical_rank(ctrb(A, B))


def test_poly_mul_examples():
    np.testing.assert_array_equal(mk.poly_mul([3.0, 2.0, 1.0], [1.0]), [3.0, 2.0, 1.0])
    # (0.5s + 1)(1.9s^2 - 0.002s + 2.1), expanded by hand
    np.testing.assert_allclose(mk.poly_mul([0.5, 1.0], [1.9, -0.002, 2.1]),
                               [0.95, 1.899, 1.048, 2.1], rtol=1e-15)
    den = mk.poly_mul(mk.poly_mul([1, 0], [1, -2]), mk.poly_mul([1, 1], [1, 5]))
    np.testing.assert_array_equal(den, [1, 4, -7, -10, 0])


def test_poly_roots_examples():
    assert mk.matched_distance(mk.poly_roots([1, 1]), [-1]) < 1e-15
    assert mk.matched_distance(mk.poly_roots([1, 0, 1]), [1j, -1j]) < 1e-15
    assert mk.matched_distance(mk.poly_roots([1, 4, -7, -10, 0]), [0, 2, -1, -5]) < 1e-12


@pytest.mark.parametrize("p", [[5.0], [0.0], [0.0, 0.0]])
def test_poly_roots_rejects_constants(p):
    with pytest.raises(ValueError):
        mk.poly_roots(p)


@settings(max_examples=100)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_roots_round_trip(deg, seed):
    rng = np.random.default_rng(seed)
    # separated roots: jittered points on a spiral, conjugate pairs included
    roots = []
    k = 0
    while len(roots) < deg:
        r = (1 + 0.4 * k) * np.exp(1j * (0.7 + 1.3 * k)) + 0.05 * rng.standard_normal()
        if len(roots) + 2 <= deg and rng.random() < 0.5:
            roots.extend([r, r.conjugate()])
        else:
            roots.append(complex(r.real))
        k += 1
    p = mk.poly_from_roots(roots)
    assert np.isrealobj(p)
    assert mk.matched_distance(mk.poly_roots(p), roots) < 1e-8
