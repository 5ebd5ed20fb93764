"""Operator systems: unital, adjoint-closed subspaces of M_n, plus certification.

An operator system is stored as a Hilbert-Schmidt-orthonormal basis stack of
shape ``(dim, n, n)``.  The identity always lies in the span and the span is
closed under adjoints; both invariants are checked at construction time.

Certification of a projection ``P`` against a system ``V`` computes
``dim(P V P)`` twice, at the search cutoff ``rank_rel`` and again at the
stricter ``cert_rel``.  A clique means the compression has the maximal
dimension ``k^2``; an anticlique means it is the scalars (dimension 1).  If
the two cutoffs disagree the verdict is ``Kind.NEITHER`` with an explanatory
trace entry, never a silently shaky certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    Projection,
    Tolerance,
    as_matrix,
    as_vector,
    rank_at,
    span_orthonormalize,
)

__all__ = [
    "OperatorSystem",
    "Kind",
    "Certificate",
    "from_span",
    "compress_system",
    "certify",
    "orbit_dim",
    "hermitian_basis",
    "derive_seed",
    "derive_rng",
    "random_hermitian",
    "haar_unitary",
    "random_system",
    "random_diagonal_system",
    "random_projection",
]

_GRAM_TOL = 1e-10
_CLOSURE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class OperatorSystem:
    """Adjoint-closed unital subspace of M_n with an HS-orthonormal basis."""

    n: int
    basis: np.ndarray  # (dim, n, n)

    def __post_init__(self) -> None:
        b = np.ascontiguousarray(self.basis, dtype=np.complex128)
        object.__setattr__(self, "basis", b)
        if b.ndim != 3 or b.shape[1:] != (self.n, self.n):
            raise ValueError(f"basis stack must have shape (dim, {self.n}, {self.n})")
        d = b.shape[0]
        if not 1 <= d <= self.n * self.n:
            raise ValueError(f"dimension {d} is impossible in M_{self.n}")
        flat = b.reshape(d, -1)
        gram = flat @ flat.conj().T
        if np.linalg.norm(gram - np.eye(d)) > _GRAM_TOL * d:
            raise ValueError("basis is not HS-orthonormal")
        # identity in the span
        eye = np.eye(self.n, dtype=np.complex128).ravel()
        coeff = flat.conj() @ eye
        if np.linalg.norm(eye - flat.T @ coeff) > _CLOSURE_TOL * np.sqrt(self.n):
            raise ValueError("identity does not lie in the span")
        # closed under adjoints
        adj = b.conj().transpose(0, 2, 1).reshape(d, -1)
        resid = adj - (adj @ flat.conj().T) @ flat
        if np.linalg.norm(resid, axis=1).max() > _CLOSURE_TOL:
            raise ValueError("span is not closed under adjoints")

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])

    def contains(self, a, rel: float = 1e-9) -> bool:
        m = as_matrix(a, self.n).ravel()
        flat = self.basis.reshape(self.dim, -1)
        resid = m - flat.T @ (flat.conj() @ m)
        scale = np.linalg.norm(m)
        return bool(np.linalg.norm(resid) <= rel * max(scale, 1e-300))


class Kind(str, Enum):
    CLIQUE = "clique"
    ANTICLIQUE = "anticlique"
    NEITHER = "neither"


@dataclass(frozen=True, eq=False)
class Certificate:
    """Outcome of certifying one projection against one operator system.

    ``commutant_dim`` is the dimension of the scalar side of the anticlique
    comparison: 1 for plain operator systems (the compression must be the
    scalars), and dim(P M' P) when certifying against a quantum graph on an
    algebra M, where the anticlique condition is P V P = P M' P.
    """

    projection: Projection
    kind: Kind
    compressed_dim: int
    k: int
    tol: Tolerance
    seed: int | None = None
    trace: tuple[str, ...] = ()
    commutant_dim: int = 1

    def __post_init__(self) -> None:
        if self.kind is Kind.CLIQUE and self.compressed_dim != self.k * self.k:
            raise ValueError("clique certificates require compressed_dim == k^2")
        if self.kind is Kind.ANTICLIQUE and self.compressed_dim != self.commutant_dim:
            raise ValueError(
                "anticlique certificates require compressed_dim == commutant_dim"
            )


def from_span(matrices, n: int, tol: Tolerance = DEFAULT_TOL) -> OperatorSystem:
    """Smallest operator system containing ``matrices``: adjoin I_n and adjoints, orthonormalize."""
    mats = [as_matrix(m, n) for m in matrices]
    closed = [np.eye(n, dtype=np.complex128)]
    closed.extend(mats)
    closed.extend(m.conj().T for m in mats)
    basis = span_orthonormalize(closed, tol)
    return OperatorSystem(n, np.stack(basis))


def compress_system(v: OperatorSystem, p: Projection, tol: Tolerance = DEFAULT_TOL) -> OperatorSystem:
    """The operator system ``P V P`` in frame coordinates (lives in M_k).

    Contains I_k automatically because ``P I_n P`` compresses to the identity.
    """
    if p.n != v.n:
        raise ValueError(f"projection on C^{p.n} cannot compress a system in M_{v.n}")
    comp = p.compress_stack(v.basis)
    basis = span_orthonormalize(list(comp), tol)
    return OperatorSystem(p.k, np.stack(basis))


def certify(
    v: OperatorSystem,
    p: Projection,
    k: int,
    tol: Tolerance = DEFAULT_TOL,
    *,
    seed: int | None = None,
    trace: tuple[str, ...] = (),
) -> Certificate:
    """Certify ``p`` against ``v``: clique iff dim(PVP) = k^2, anticlique iff 1.

    The compressed dimension is computed at both ``tol.rank_rel`` and
    ``tol.cert_rel``; if the counts disagree the certificate is downgraded to
    ``Kind.NEITHER`` with a trace note.
    """
    if p.n != v.n:
        raise ValueError(f"projection on C^{p.n} does not act on M_{v.n}")
    if p.k != k:
        raise ValueError(f"projection has rank {p.k}, expected {k}")
    comp = p.compress_stack(v.basis).reshape(v.dim, k * k)
    s = np.linalg.svd(comp, compute_uv=False)
    d_search = rank_at(s, tol.rank_rel)
    d_cert = rank_at(s, tol.cert_rel)
    notes = list(trace)
    if d_search != d_cert:
        kind = Kind.NEITHER
        notes.append(
            f"tolerance-ambiguous compression: dim {d_search} at rank_rel "
            f"vs {d_cert} at cert_rel"
        )
    elif d_cert == k * k:
        kind = Kind.CLIQUE
    elif d_cert == 1:
        kind = Kind.ANTICLIQUE
    else:
        kind = Kind.NEITHER
    return Certificate(p, kind, d_cert, k, tol, seed, tuple(notes))


def orbit_dim(v: OperatorSystem, vec, tol: Tolerance = DEFAULT_TOL) -> int:
    """Dimension of the orbit ``{A x : A in V}`` of a nonzero vector ``x``."""
    x = as_vector(vec, v.n)
    if np.linalg.norm(x) == 0.0:
        raise ValueError("orbit of the zero vector is undefined")
    orbit = np.einsum("mij,j->mi", v.basis, x, optimize=True)
    s = np.linalg.svd(orbit, compute_uv=False)
    return rank_at(s, tol.rank_rel)


def hermitian_basis(v: OperatorSystem) -> np.ndarray:
    """Real-orthonormal Hermitian basis of the Hermitian part of ``v``.

    The first element is ``I/sqrt(n)``; the rest are traceless.  For an
    operator system the real dimension of the Hermitian part equals
    ``v.dim``, so the stack has shape ``(v.dim, n, n)`` in the generic case.
    """
    n = v.n
    cand = []
    for a in v.basis:
        cand.append((a + a.conj().T) / 2.0)
        cand.append((a - a.conj().T) / 2.0j)
    ident = np.eye(n, dtype=np.complex128) / np.sqrt(n)

    def realify(h: np.ndarray) -> np.ndarray:
        return np.concatenate([h.real.ravel(), h.imag.ravel()])

    flat = np.stack([realify(h) for h in cand])
    iflat = realify(ident)
    flat = flat - np.outer(flat @ iflat, iflat)
    _, s, vh = np.linalg.svd(flat, full_matrices=False)
    r = rank_at(s, DEFAULT_TOL.rank_rel)
    out = [ident]
    for i in range(r):
        row = vh[i]
        half = row.shape[0] // 2
        out.append((row[:half] + 1j * row[half:]).reshape(n, n))
    return np.stack(out)


def derive_seed(seed: int, *key: int) -> int:
    """Stable derived seed for a sub-search, distinct per key path."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1)[0])


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator seeded by :func:`derive_seed`."""
    return np.random.default_rng(derive_seed(seed, *key))


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    """GUE-style random Hermitian matrix."""
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (z + z.conj().T) / 2.0


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed unitary via phase-fixed QR of a Ginibre matrix."""
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases


def random_system(n: int, d: int, seed: int) -> OperatorSystem:
    """Operator system of dimension exactly ``d``: span{I} plus d-1 random Hermitians.

    Deterministic given ``seed``.  Requires ``1 <= d <= n^2``.
    """
    if not 1 <= d <= n * n:
        raise ValueError(f"dimension {d} is impossible in M_{n}")
    rng = np.random.default_rng(seed)
    for _ in range(32):
        mats = [random_hermitian(rng, n) for _ in range(d - 1)]
        sys = from_span(mats, n)
        if sys.dim == d:
            return sys
    raise RuntimeError(f"could not draw a dimension-{d} system in M_{n}")


def random_diagonal_system(n: int, d: int, seed: int) -> OperatorSystem:
    """Operator system inside the diagonal algebra D_n with dimension exactly ``d``."""
    if not 1 <= d <= n:
        raise ValueError(f"a diagonal system in M_{n} has dimension between 1 and {n}")
    rng = np.random.default_rng(seed)
    for _ in range(32):
        mats = [np.diag(rng.standard_normal(n)).astype(np.complex128) for _ in range(d - 1)]
        sys = from_span(mats, n)
        if sys.dim == d:
            return sys
    raise RuntimeError(f"could not draw a dimension-{d} diagonal system in M_{n}")


def random_projection(n: int, k: int, seed: int) -> Projection:
    """Random rank-``k`` projection (Haar frame), deterministic given ``seed``."""
    if not 1 <= k <= n:
        raise ValueError(f"rank {k} is impossible in C^{n}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    q, r = np.linalg.qr(z)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return Projection(n, k, q * phases)
