from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from trisdp import dense_linalg as dl


def sym_matrices(max_n=8):
    elems = st.floats(-10, 10, allow_nan=False, allow_subnormal=False)
    return st.integers(1, max_n).flatmap(
        lambda n: arrays(float, (n, n), elements=elems).map(lambda M: 0.5 * (M + M.T))
    )


def test_both_backends_registered():
    assert "python" in dl.available_backends()
    assert dl.backend() in dl.available_backends()


def test_use_backend_rejects_unknown():
    with pytest.raises(ValueError):
        with dl.use_backend("fortran"):
            pass


# eigen --------------------------------------------------------------------

def test_sym_eig_identity(kernel_backend):
    w, V = dl.sym_eig(np.eye(3))
    assert np.allclose(w, 1.0)
    assert np.allclose(V @ V.T, np.eye(3))


def test_sym_eig_diagonal_sorted(kernel_backend):
    w, V = dl.sym_eig(np.diag([2.0, 1.0]))
    assert np.allclose(w, [1.0, 2.0])
    assert np.allclose(np.abs(V), [[0, 1], [1, 0]])


def test_sym_eig_swap(kernel_backend):
    w, _ = dl.sym_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(w, [-1.0, 1.0])


@given(sym_matrices())
def test_sym_eig_reconstructs(M):
    for name in dl.available_backends():
        with dl.use_backend(name):
            w, V = dl.sym_eig(M)
        scale = 1.0 + np.abs(M).max()
        assert np.all(np.diff(w) >= 0)
        assert np.allclose(V @ np.diag(w) @ V.T, M, atol=1e-10 * scale)
        assert np.allclose(V.T @ V, np.eye(len(M)), atol=1e-10)
        assert np.allclose(w, np.linalg.eigvalsh(M), atol=1e-10 * scale)


def test_sym_eig_sign_convention(kernel_backend, rng):
    M = rng.standard_normal((6, 6))
    _, V = dl.sym_eig(M + M.T)
    lead = V[np.argmax(np.abs(V), axis=0), np.arange(6)]
    assert np.all(lead > 0)


# QR -----------------------------------------------------------------------

def test_qr_identity(kernel_backend):
    Q, R = dl.qr_decompose(np.eye(3))
    assert np.allclose(Q, np.eye(3)) and np.allclose(R, np.eye(3))


def test_qr_diagonal(kernel_backend):
    Q, R = dl.qr_decompose(np.diag([3.0, 5.0]))
    assert np.allclose(Q, np.eye(2)) and np.allclose(R, np.diag([3.0, 5.0]))


def test_qr_hand_gram_schmidt(kernel_backend):
    Q, R = dl.qr_decompose(np.array([[3.0, 0.0], [4.0, 5.0]]))
    assert np.allclose(Q, [[0.6, -0.8], [0.8, 0.6]], atol=1e-15)
    assert np.allclose(R, [[5.0, 4.0], [0.0, 3.0]], atol=1e-14)


@given(st.integers(1, 7).flatmap(lambda c: st.integers(c, 9).flatmap(
    lambda r: arrays(float, (r, c), elements=st.floats(-5, 5, allow_nan=False, allow_subnormal=False)))))
def test_qr_properties(M):
    for name in dl.available_backends():
        with dl.use_backend(name):
            Q, R = dl.qr_decompose(M)
        assert np.allclose(Q @ R, M, atol=1e-12 * (1 + np.abs(M).max()))
        assert np.allclose(Q.T @ Q, np.eye(Q.shape[1]), atol=1e-12)
        assert not np.any(np.tril(R, -1))
        assert np.all(np.diag(R) >= 0)


def test_qr_rejects_wide():
    with pytest.raises(ValueError):
        dl.qr_decompose(np.ones((2, 3)))


# Cholesky and triangular solves ------------------------------------------

def test_cholesky_hand(kernel_backend):
    L = dl.cholesky_lower(np.array([[4.0, 2.0], [2.0, 2.0]]))
    assert np.allclose(L, [[2.0, 0.0], [1.0, 1.0]])
    assert np.allclose(dl.cholesky_lower(np.eye(3)), np.eye(3))


def test_cholesky_indefinite_reports_pivot(kernel_backend):
    with pytest.raises(dl.NotPositiveDefinite) as info:
        dl.cholesky_lower(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert info.value.pivot == 1


@given(st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_cholesky_and_inverse_random_spd(n, seed):
    g = np.random.default_rng(seed)
    W = g.standard_normal((n, n))
    M = W @ W.T + n * np.eye(n)
    for name in dl.available_backends():
        with dl.use_backend(name):
            L = dl.cholesky_lower(M)
            Minv = dl.inv_spd(M)
            B = g.standard_normal((n, 3))
            X = dl.solve_lower(L, B)
            Y = dl.solve_upper(L.T, B)
        assert np.allclose(L @ L.T, M, atol=1e-10 * n)
        assert np.allclose(Minv @ M, np.eye(n), atol=1e-9)
        assert np.allclose(L @ X, B, atol=1e-10)
        assert np.allclose(L.T @ Y, B, atol=1e-10)


# indefinite solve ---------------------------------------------------------

def test_solve_identity(kernel_backend):
    assert np.allclose(dl.solve_sym_indefinite(np.eye(2), np.array([1.0, 2.0])), [1.0, 2.0])


def _exact_2x2(K, rhs):
    (a, b), (c, d) = K
    det = a * d - b * c
    return [(d * rhs[0] - b * rhs[1]) / det, (a * rhs[1] - c * rhs[0]) / det]


def test_solve_sqp_worked_example(kernel_backend):
    # first Newton-KKT step of min x^2 s.t. x^2 = 1 from x = 2, mu = 0
    K = [[Fraction(2), Fraction(-4)], [Fraction(-4), Fraction(0)]]
    for rhs in ([Fraction(-4), Fraction(3)], [Fraction(-4), Fraction(-3)]):
        want = [float(v) for v in _exact_2x2(K, rhs)]
        got = dl.solve_sym_indefinite(np.array(K, dtype=float), np.array(rhs, dtype=float))
        assert np.allclose(got, want, atol=1e-15)
    got = dl.solve_sym_indefinite(np.array([[2.0, -4.0], [-4.0, 0.0]]), np.array([-4.0, 3.0]))
    assert np.allclose(got, [-0.75, 0.625], atol=1e-15)


def test_solve_zero_matrix_singular(kernel_backend):
    with pytest.raises(dl.SingularSystem):
        dl.solve_sym_indefinite(np.zeros((2, 2)), np.array([1.0, 0.0]))


def test_solve_consistent_singular_system_regularizes(kernel_backend, rng):
    # rank-deficient but consistent: a solution exists and is found with a shift
    U = rng.standard_normal((6, 4))
    K = U @ np.diag([3.0, -2.0, 1.0, -1.0]) @ U.T
    rhs = K @ rng.standard_normal(6)
    x, rho = dl.solve_sym_indefinite(K, rhs, return_shift=True)
    assert rho > 0
    assert np.linalg.norm(K @ x - rhs) <= 1e-6 * np.linalg.norm(rhs)


@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_solve_random_saddle_point(d, seed):
    g = np.random.default_rng(seed)
    m = max(1, d // 3)
    W = g.standard_normal((d, d))
    J = g.standard_normal((d, m))
    K = np.block([[W + W.T, -J], [-J.T, np.zeros((m, m))]])
    rhs = g.standard_normal(d + m)
    for name in dl.available_backends():
        with dl.use_backend(name):
            x = dl.solve_sym_indefinite(K, rhs)
        assert np.allclose(K @ x, rhs, atol=1e-8 * (1 + np.linalg.norm(K)) * (1 + np.linalg.norm(x)))


@pytest.mark.parametrize("n", [1, 5, 47, 48, 49, 100])
def test_lu_backends_agree(n):
    g = np.random.default_rng(n)
    A = g.standard_normal((n, n))
    out = {}
    for name in dl.available_backends():
        with dl.use_backend(name):
            out[name] = dl._impl.lu_factor(A.copy())
    lu, piv, _ = out["python"]
    L = np.tril(np.asarray(lu), -1) + np.eye(n)
    U = np.triu(np.asarray(lu))
    assert np.allclose(L @ U, A[np.asarray(piv)], atol=1e-10 * n)
    for name, (lu2, piv2, _) in out.items():
        assert np.array_equal(np.asarray(piv2), np.asarray(piv)), name
        assert np.allclose(np.asarray(lu2), np.asarray(lu), atol=1e-11 * n), name


# helpers ------------------------------------------------------------------

def test_helpers():
    assert dl.lower_packed_size(10, 4) == 34
    assert dl.is_lower_triangular(np.array([[1.0, 0.0], [2.0, 3.0]]))
    assert not dl.is_lower_triangular(np.array([[1.0, 1e-300], [2.0, 3.0]]))
    assert np.array_equal(dl.as_symmetric([[1, 2], [0, 1]]), [[1, 1], [1, 1]])
    with pytest.raises(ValueError):
        dl.as_symmetric(np.ones((2, 3)))
    assert dl.lambda_min(np.diag([3.0, -1.0, 2.0])) == pytest.approx(-1.0)


@pytest.mark.parametrize("env, want", [("python", "python"), ("nonsense", None)])
def test_backend_selected_at_import(env, want):
    import os
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-c", "from trisdp import dense_linalg as d; print(d.backend())"],
        env={**os.environ, "TRISDP_BACKEND": env}, capture_output=True, text=True, check=True,
    ).stdout.strip()
    assert out == (want or ("cython" if "cython" in dl.available_backends() else "python"))
