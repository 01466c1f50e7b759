"""Seeded problem generators and SDPA sparse-format I/O.

Random streams come from numpy's PCG64 bit generator and only its uniform
``random()`` doubles are used, so a seed pins an instance across platforms.

SDPA sparse files here follow the toolkit's primal convention: matrix 0 is
the cost ``C`` of ``min <C, X>`` and line 4 holds ``b``.  Files from SDPLIB
state ``max <F0, Y>``; read them as-is and you solve with ``C = F0``, i.e. the
sign of the objective is flipped.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .sdp_model import PrimalDualTriple, SdpProblem, apply_A, apply_A_star

FORMAT_VERSION = 1


def _rng(seed):
    return np.random.Generator(np.random.PCG64(int(seed)))


def _uniform(rng, low, high, size):
    return low + (high - low) * rng.random(size)


def _sym(M):
    return 0.5 * (M + np.swapaxes(M, -1, -2))


def gen_random_sdp(n, m, seed):
    """Random standard-form SDP with a strictly feasible primal-dual pair.

    Draw order: ``A`` (m x n x n, uniform [-1, 1], symmetrized), ``W``
    (n x n), ``y0`` (m), ``V`` (n x n), all uniform [-1, 1].  Then
    ``X0 = W W^T + 0.1 I``, ``Z0 = V V^T + 0.1 I``, ``b = A(X0)`` and
    ``C = A*(y0) + Z0``.  Returns ``(problem, (X0, y0, Z0))``.
    """
    if n < 2 or m < 1:
        raise ValueError(f"need n >= 2 and m >= 1, got n={n}, m={m}")
    rng = _rng(seed)
    A = _sym(_uniform(rng, -1.0, 1.0, (m, n, n)))
    W = _uniform(rng, -1.0, 1.0, (n, n))
    y0 = _uniform(rng, -1.0, 1.0, m)
    V = _uniform(rng, -1.0, 1.0, (n, n))
    X0 = _sym(W @ W.T) + 0.1 * np.eye(n)
    Z0 = _sym(V @ V.T) + 0.1 * np.eye(n)
    shell = SdpProblem(np.zeros((n, n)), A, np.zeros(m))
    b = apply_A(shell, X0)
    C = apply_A_star(shell, y0) + Z0
    return SdpProblem(C, A, b), PrimalDualTriple(X0, y0, Z0)


def gen_planted_sdp(n, m, rank, seed):
    """SDP with a planted strictly complementary solution in block form.

    ``X* = diag(W, 0)`` with ``W`` (rank x rank) positive definite and
    ``Z* = diag(0, V)`` with ``V`` positive definite, ``y*`` uniform in
    [-1, 1] and random symmetric ``A_j``; then ``b = A(X*)`` and
    ``C = A*(y*) + Z*``.  For generic data and
    ``rank (rank + 1) / 2 <= m <= n rank - rank (rank - 1) / 2`` the pair
    is the unique primal-dual solution.  Draw order: ``A``, ``W`` factor,
    ``V`` factor, ``y*``.  Returns ``(problem, triple)``.
    """
    if not 1 <= rank < n:
        raise ValueError(f"need 1 <= rank < n, got rank={rank}, n={n}")
    rng = _rng(seed)
    A = _sym(_uniform(rng, -1.0, 1.0, (m, n, n)))
    P = _uniform(rng, -1.0, 1.0, (rank, rank))
    Q = _uniform(rng, -1.0, 1.0, (n - rank, n - rank))
    y = _uniform(rng, -1.0, 1.0, m)
    X = np.zeros((n, n))
    X[:rank, :rank] = _sym(P @ P.T) + np.eye(rank)
    Z = np.zeros((n, n))
    Z[rank:, rank:] = _sym(Q @ Q.T) + np.eye(n - rank)
    shell = SdpProblem(np.zeros((n, n)), A, np.zeros(m))
    p = SdpProblem(apply_A_star(shell, y) + Z, A, apply_A(shell, X))
    return p, PrimalDualTriple(X, y, Z)


def maxcut_problem(B):
    """Max-cut relaxation ``min 1/4 <B - diag(B e), X>`` s.t. ``X_jj = 1``."""
    B = np.asarray(B, dtype=float)
    n = B.shape[0]
    C = 0.25 * (B - np.diag(B.sum(axis=1)))
    A = np.zeros((n, n, n))
    A[np.arange(n), np.arange(n), np.arange(n)] = 1.0
    return SdpProblem(C, A, np.ones(n))


def gen_maxcut(n, density, seed):
    """Max-cut relaxation on a random weighted graph.

    Each pair ``i < j`` (row-major order) draws two uniforms: the first
    decides whether the edge exists (``< density``), the second is its weight.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if not 0.0 < density <= 1.0:
        raise ValueError(f"density must lie in (0, 1], got {density}")
    rng = _rng(seed)
    iu = np.triu_indices(n, 1)
    draws = rng.random((len(iu[0]), 2))
    w = np.where(draws[:, 0] < density, draws[:, 1], 0.0)
    B = np.zeros((n, n))
    B[iu] = w
    B = B + B.T
    return maxcut_problem(B)


def _dilation(B):
    p, q = B.shape
    D = np.zeros((p + q, p + q))
    D[:p, p:] = B
    D[p:, :p] = B.T
    return D


def _skew_dilation(B):
    p, q = B.shape
    E = np.zeros((p + q, p + q))
    E[:p, p:] = B
    E[p:, :p] = -B.T
    return E


def real_embed(P, Q):
    """Real symmetric image ``[[P, -Q], [Q, P]]`` of the Hermitian ``P + iQ``."""
    return np.block([[P, -Q], [Q, P]])


@dataclass(frozen=True)
class NormMinInstance:
    """``min_z || sum_k z_k B_k + B_0 ||_2`` over complex ``z`` as a
    standard-form SDP.

    Constraint order: trace (``<-I, X> = -1``), then one per real part of
    ``z``, then one per imaginary part.  The SDP multipliers are
    ``(t, Re z, Im z)`` and the optimal value equals ``t = -<C, X>``.
    """

    problem: SdpProblem
    B: tuple

    @property
    def m(self):
        return len(self.B) - 1

    def norm(self, z):
        z = np.asarray(z, dtype=complex)
        M = self.B[0] + sum(zk * Bk for zk, Bk in zip(z, self.B[1:]))
        return float(np.linalg.norm(M, 2))

    def value_from_objective(self, objective):
        return -float(objective)

    def variables_from_multipliers(self, mu):
        mu = np.asarray(mu, dtype=float)
        k = self.m
        return float(mu[0]), mu[1:k + 1] + 1j * mu[k + 1:2 * k + 1]


def normmin_problem(B):
    """Build the SDP for given real ``B_0, ..., B_m`` (all p x q)."""
    B = tuple(np.asarray(Bk, dtype=float) for Bk in B)
    p, q = B[0].shape
    N = p + q
    Z = np.zeros((N, N))
    mats = [-np.eye(2 * N)]
    mats += [real_embed(_dilation(Bk), Z) for Bk in B[1:]]
    mats += [real_embed(Z, _skew_dilation(Bk)) for Bk in B[1:]]
    C = -real_embed(_dilation(B[0]), Z)
    b = np.zeros(len(mats))
    b[0] = -1.0
    return NormMinInstance(SdpProblem(C, np.array(mats), b), B)


def gen_normmin(p, q, m, seed):
    """Norm-minimization instance with ``B_0..B_m`` uniform in [0, 1],
    drawn in that order."""
    if min(p, q) < 1 or m < 0:
        raise ValueError(f"need p, q >= 1 and m >= 0, got p={p}, q={q}, m={m}")
    rng = _rng(seed)
    return normmin_problem([rng.random((p, q)) for _ in range(m + 1)])


class SdpaParseError(ValueError):
    def __init__(self, msg, lineno=None):
        where = f"line {lineno}: " if lineno is not None else ""
        super().__init__(where + msg)
        self.lineno = lineno


_PUNCT = re.compile(r"[,{}()]")


def _tokens(line):
    return _PUNCT.sub(" ", line).split()


def read_sdpa(path):
    """Read an SDPA sparse file into a single dense block.

    Multi-block files are placed block-diagonally; negative block sizes
    denote diagonal blocks.  Entries give the upper triangle (``i <= j``,
    1-based, within the block); repeated entries overwrite earlier ones.
    """
    lines = Path(path).read_text().splitlines()
    body = []
    for lineno, line in enumerate(lines, 1):
        s = line.strip()
        if not s or (not body and s[0] in '*"'):
            continue
        body.append((lineno, s))

    def header_int(idx, what):
        if idx >= len(body):
            raise SdpaParseError(f"missing {what}")
        lineno, s = body[idx]
        toks = _tokens(s)
        try:
            return int(toks[0]), lineno
        except (IndexError, ValueError):
            raise SdpaParseError(f"expected {what}, got {s!r}", lineno) from None

    m, _ = header_int(0, "number of constraints")
    nblocks, _ = header_int(1, "number of blocks")
    if m < 1 or nblocks < 1:
        raise SdpaParseError("number of constraints and blocks must be positive", body[0][0])
    if len(body) < 3:
        raise SdpaParseError("missing block sizes")
    lineno, s = body[2]
    try:
        sizes = [int(t) for t in _tokens(s)[:nblocks]]
    except ValueError:
        raise SdpaParseError(f"bad block sizes {s!r}", lineno) from None
    if len(sizes) != nblocks or 0 in sizes:
        raise SdpaParseError(f"expected {nblocks} nonzero block sizes", lineno)

    # b may wrap over several lines
    idx = 3
    bvals = []
    while len(bvals) < m:
        if idx >= len(body):
            raise SdpaParseError("right-hand side vector is truncated")
        lineno, s = body[idx]
        try:
            bvals += [float(t) for t in _tokens(s)]
        except ValueError:
            raise SdpaParseError(f"bad right-hand side value in {s!r}", lineno) from None
        idx += 1
    if len(bvals) != m:
        raise SdpaParseError(f"expected {m} right-hand side values, got {len(bvals)}", lineno)

    dims = [abs(k) for k in sizes]
    offsets = np.concatenate(([0], np.cumsum(dims)[:-1]))
    n = int(sum(dims))
    mats = np.zeros((m + 1, n, n))
    for lineno, s in body[idx:]:
        toks = s.split()
        if len(toks) < 5:
            raise SdpaParseError(f"expected 'matno blkno i j value', got {s!r}", lineno)
        try:
            matno, blk, i, j = (int(t) for t in toks[:4])
            val = float(toks[4])
        except ValueError:
            raise SdpaParseError(f"malformed entry {s!r}", lineno) from None
        if not 0 <= matno <= m:
            raise SdpaParseError(f"matrix number {matno} out of range 0..{m}", lineno)
        if not 1 <= blk <= nblocks:
            raise SdpaParseError(f"block number {blk} out of range 1..{nblocks}", lineno)
        size = dims[blk - 1]
        if not (1 <= i <= size and 1 <= j <= size):
            raise SdpaParseError(f"index ({i}, {j}) outside block of size {size}", lineno)
        if i > j:
            raise SdpaParseError(f"entry ({i}, {j}) lies below the diagonal", lineno)
        if sizes[blk - 1] < 0 and i != j:
            raise SdpaParseError(f"off-diagonal entry ({i}, {j}) in a diagonal block", lineno)
        a = offsets[blk - 1] + i - 1
        c = offsets[blk - 1] + j - 1
        mats[matno, a, c] = val
        mats[matno, c, a] = val
    return SdpProblem(mats[0], mats[1:], np.array(bvals))


def write_sdpa(p, path):
    """Write ``p`` as a one-block SDPA sparse file (upper-triangle entries,
    shortest round-trip decimal for every value)."""
    out = [str(p.m), "1", str(p.n), " ".join(repr(float(v)) for v in p.b)]
    iu, ju = np.triu_indices(p.n)
    for matno, M in enumerate([p.C, *p.A]):
        vals = M[iu, ju]
        for k in np.flatnonzero(vals):
            out.append(f"{matno} 1 {iu[k] + 1} {ju[k] + 1} {float(vals[k])!r}")
    Path(path).write_text("\n".join(out) + "\n")


def write_sidecar(path, family, dims, seed):
    meta = {"family": family, "dims": dict(dims), "seed": int(seed), "format_version": FORMAT_VERSION}
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return meta


def read_sidecar(path):
    meta = json.loads(Path(path).read_text())
    if meta.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported sidecar format_version {meta.get('format_version')!r}")
    return meta
