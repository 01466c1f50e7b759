import hashlib

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from trisdp.dense_linalg import lambda_min
from trisdp.pipeline import solve_sdp
from trisdp.problems_io import (
    SdpaParseError,
    gen_maxcut,
    gen_normmin,
    gen_planted_sdp,
    gen_random_sdp,
    maxcut_problem,
    read_sdpa,
    read_sidecar,
    real_embed,
    write_sdpa,
    write_sidecar,
)
from trisdp.sdp_model import apply_A, apply_A_star, kkt_residuals


def _digest(*arrays):
    return hashlib.sha256(b"".join(np.ascontiguousarray(a).tobytes() for a in arrays)).hexdigest()[:16]


# generators ---------------------------------------------------------------

def test_random_sdp_frozen_draws():
    p, t = gen_random_sdp(5, 4, 7)
    assert _digest(p.A) == "726cbb3d5bd4e366"
    assert t.y[0] == -0.5471530346057119
    assert p.b[0] == pytest.approx(-4.119771247794763, rel=1e-14)
    assert p.C[0, 0] == pytest.approx(0.8092711291908897, rel=1e-14)


def test_maxcut_frozen():
    p = gen_maxcut(8, 0.5, 3)
    assert _digest(p.C, p.A, p.b) == "802c1bdebf460306"
    assert p.C[0, 1] == 0.059202626649024925


def test_same_seed_same_bytes():
    a, ta = gen_random_sdp(6, 9, 42)
    b, tb = gen_random_sdp(6, 9, 42)
    assert _digest(a.C, a.A, a.b, ta.X) == _digest(b.C, b.A, b.b, tb.X)
    assert _digest(gen_normmin(2, 3, 2, 5).problem.A) == _digest(gen_normmin(2, 3, 2, 5).problem.A)
    assert _digest(gen_random_sdp(6, 9, 43)[0].A) != _digest(a.A)


@given(st.integers(2, 8), st.integers(1, 12), st.integers(0, 2**40))
def test_random_sdp_embedded_triple(n, m, seed):
    p, t = gen_random_sdp(n, m, seed)
    r = kkt_residuals(p, t)
    assert r.primal <= 1e-12 * (1 + np.linalg.norm(p.b))
    assert r.dual <= 1e-12 * (1 + np.linalg.norm(p.C))
    assert r.min_eig_X >= 0.1 - 1e-12 and r.min_eig_Z >= 0.1 - 1e-12
    assert np.all(np.abs(p.A) <= 1.0)


def test_random_sdp_bad_dims():
    with pytest.raises(ValueError):
        gen_random_sdp(1, 3, 0)
    with pytest.raises(ValueError):
        gen_random_sdp(3, 0, 0)


def test_planted_triple_is_complementary():
    p, t = gen_planted_sdp(7, 6, 2, 4)
    r = kkt_residuals(p, t)
    assert r.primal <= 1e-12 and r.dual <= 1e-12 and r.comp == 0.0
    assert np.linalg.matrix_rank(t.X) == 2 and np.linalg.matrix_rank(t.Z) == 5


def test_maxcut_two_nodes():
    p = maxcut_problem(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(p.C, [[-0.25, 0.25], [0.25, -0.25]])
    assert np.allclose(apply_A(p, np.eye(2)), p.b) and np.all(p.b == 1.0)


def test_maxcut_empty_graph():
    p = maxcut_problem(np.zeros((4, 4)))
    assert not p.C.any()
    assert p.objective(np.eye(4)) == 0.0


@given(st.integers(2, 12), st.floats(0.05, 1.0), st.integers(0, 2**40))
def test_maxcut_structure(n, density, seed):
    p = gen_maxcut(n, density, seed)
    B = 4 * p.C - np.diag(np.diag(4 * p.C))
    assert np.allclose(B, B.T) and np.all(B >= 0) and np.all(B <= 1)
    assert np.allclose(np.diag(4 * p.C), -B.sum(axis=1))
    assert p.m == n


def test_maxcut_density_validation():
    with pytest.raises(ValueError):
        gen_maxcut(5, 0.0, 1)


def test_real_embedding_preserves_spectrum(rng):
    P = rng.standard_normal((3, 3))
    Q = rng.standard_normal((3, 3))
    H = (P + P.T) + 1j * (Q - Q.T)
    w = np.linalg.eigvalsh(H)
    we = np.linalg.eigvalsh(real_embed(H.real, H.imag))
    assert np.allclose(we, np.sort(np.repeat(w, 2)))


def test_normmin_structure():
    nm = gen_normmin(2, 3, 2, 1)
    N = 2 * (2 + 3)
    assert nm.problem.n == N and nm.problem.m == 1 + 2 * 2
    assert np.array_equal(nm.problem.A[0], -np.eye(N))
    assert nm.problem.b[0] == -1.0 and not nm.problem.b[1:].any()


def test_normmin_dual_slack_is_norm_lmi(rng):
    """C - A*(t, x, y) >= 0 exactly when t >= ||B(z)||."""
    nm = gen_normmin(2, 3, 2, 8)
    z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    s = nm.norm(z)
    for t, feasible in ((s * 1.001, True), (s * 0.999, False)):
        y = np.concatenate([[t], z.real, z.imag])
        assert (lambda_min(nm.problem.C - apply_A_star(nm.problem, y)) >= 0) == feasible


def test_normmin_no_z_matches_svd():
    nm = gen_normmin(3, 4, 0, 11)
    # largest singular value of B_0 from numpy's SVD, frozen
    assert nm.norm(np.zeros(0)) == pytest.approx(1.6015303601623245, abs=1e-15)
    sol = solve_sdp(nm.problem, "tnsdp", eps=1e-10)
    assert nm.value_from_objective(sol.objective) == pytest.approx(1.6015303601623245, abs=1e-8)


# SDPA ---------------------------------------------------------------------

def test_sdpa_roundtrip_exact(tmp_path):
    for p in (gen_maxcut(4, 0.5, 9), gen_random_sdp(4, 3, 2)[0], gen_normmin(1, 2, 1, 3).problem):
        path = tmp_path / "p.dat-s"
        write_sdpa(p, path)
        q = read_sdpa(path)
        assert np.array_equal(p.C, q.C) and np.array_equal(p.A, q.A) and np.array_equal(p.b, q.b)
        first = path.read_bytes()
        write_sdpa(q, path)
        assert path.read_bytes() == first


def test_sdpa_read_small(tmp_path):
    path = tmp_path / "s.dat-s"
    path.write_text('"comment\n* another\n1\n1\n2\n1\n0 1 1 2 0.25\n1 1 1 1 1.0\n')
    p = read_sdpa(path)
    assert np.array_equal(p.C, [[0.0, 0.25], [0.25, 0.0]])
    assert np.array_equal(p.A[0], [[1.0, 0.0], [0.0, 0.0]])
    assert np.array_equal(p.b, [1.0])


def test_sdpa_lower_entry_rejected(tmp_path):
    path = tmp_path / "bad.dat-s"
    path.write_text("1\n1\n2\n1\n1 1 2 1 1.0\n")
    with pytest.raises(SdpaParseError) as info:
        read_sdpa(path)
    assert info.value.lineno == 5


def test_sdpa_multi_block_and_punctuation(tmp_path):
    path = tmp_path / "mb.dat-s"
    path.write_text("2\n2\n{2, -2}\n{1.0, 2.0}\n0 1 1 2 3.0\n1 2 2 2 4.0\n2 1 1 1 5.0\n")
    p = read_sdpa(path)
    assert p.n == 4
    assert p.C[0, 1] == 3.0 and p.A[0][3, 3] == 4.0 and p.A[1][0, 0] == 5.0
    assert np.array_equal(p.b, [1.0, 2.0])


@pytest.mark.parametrize("body, line", [
    ("1\n1\n2\n1\n0 1 1 3 1.0\n", 5),
    ("1\n1\n2\n1\n2 1 1 1 1.0\n", 5),
    ("1\n1\n-2\n1\n0 1 1 2 1.0\n", 5),
    ("1\n1\n2\n1\n0 1 1\n", 5),
    ("x\n1\n2\n1\n", 1),
])
def test_sdpa_errors(tmp_path, body, line):
    path = tmp_path / "e.dat-s"
    path.write_text(body)
    with pytest.raises(SdpaParseError) as info:
        read_sdpa(path)
    assert info.value.lineno == line


def test_sdpa_truncated_rhs(tmp_path):
    path = tmp_path / "t.dat-s"
    path.write_text("3\n1\n2\n1 2\n")
    with pytest.raises(SdpaParseError):
        read_sdpa(path)


def test_sidecar_roundtrip(tmp_path):
    path = tmp_path / "x.json"
    meta = write_sidecar(path, "rand", {"n": 4, "m": 3}, 7)
    assert read_sidecar(path) == meta
    path.write_text('{"format_version": 99}')
    with pytest.raises(ValueError):
        read_sidecar(path)
