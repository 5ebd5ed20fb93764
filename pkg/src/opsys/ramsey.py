"""The clique-or-anticlique dichotomy search.

Three layers: the diagonal trichotomy (clique by coordinate selection,
anticlique by the low-dimension extractor, or an honest Neither), the
phase-1 search for vectors with small orbits whose accumulated compression
is diagonal, and the phase-2 chain construction feeding the staircase
clique machinery.  At the guaranteed ambient scale one branch always fires;
at desk scale Neither is a legitimate, fully traced outcome.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .constructions import anticlique_lowdim, blocks2_clique, diagonal_clique_projection
from .errors import SearchBudgetError
from .linalg import DEFAULT_TOL, Projection, Tolerance, as_vector, rank_at
from .systems import (
    Certificate,
    Kind,
    OperatorSystem,
    certify,
    derive_rng,
    derive_seed,
    from_span,
    hermitian_basis,
    orbit_dim,
    random_projection,
)

__all__ = [
    "SearchParams",
    "diagonal_route",
    "phase1_vector_search",
    "phase2_chain",
    "find_clique_or_anticlique",
]


@dataclass(frozen=True)
class SearchParams:
    """Thresholds steering the two-phase search.

    The guaranteed-scale values are enormous (the ambient dimension that
    makes them sufficient is 8k^11); desk-scale runs override them freely —
    the pipeline structure is unchanged, only the budgets shrink.
    """

    orbit_threshold: int
    phase1_steps: int
    phase2_steps: int
    retry_budget: int = 16
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("orbit_threshold", "phase1_steps", "phase2_steps", "retry_budget"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @classmethod
    def for_k(cls, k: int, seed: int = 0, retry_budget: int = 16) -> "SearchParams":
        """Guaranteed-scale thresholds: orbit cutoff 8k^8, k^3 phase-1 steps, 2k^4 chain steps."""
        if k < 1:
            raise ValueError("need k >= 1")
        return cls(8 * k**8, k**3, 2 * k**4, retry_budget, seed)


# ---------------------------------------------------------------------------
# diagonal trichotomy
# ---------------------------------------------------------------------------


def _diagonal_stack(v: OperatorSystem) -> np.ndarray:
    """Diagonals of the basis, erroring on any off-diagonal support."""
    scale = max(float(np.abs(v.basis).max()), 1e-300)
    for idx, a in enumerate(v.basis):
        off = a - np.diag(np.diagonal(a))
        if np.abs(off).max() > 1e-8 * scale:
            raise ValueError(f"basis element {idx} is not diagonal")
    return np.stack([np.diagonal(a) for a in v.basis])


def diagonal_route(
    v: OperatorSystem,
    k: int,
    tol: Tolerance = DEFAULT_TOL,
    seed: int = 0,
) -> Certificate:
    """Clique or anticlique for a system of diagonal matrices.

    If dim(V) >= k^2+k-1 a clique is produced by selecting coordinates on
    which the diagonals stay independent and running the diagonal clique
    construction there; if dim(V) <= (n-k)/(k-1) the low-dimension
    anticlique extractor applies.  For n >= k^3-k+1 one branch always holds;
    below that the result may honestly be Neither, with a trace.
    """
    n = v.n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k = {k}")
    diags = _diagonal_stack(v)
    d = v.dim
    m = k * k + k - 1
    trace: list[str] = []
    if d >= m:
        _, _, piv = scipy.linalg.qr(diags, pivoting=True)
        cols = np.sort(piv[:m])
        sub = diags[:, cols]
        s = np.linalg.svd(sub, compute_uv=False)
        if rank_at(s, tol.rank_rel) == m:
            frame = np.zeros((n, k), dtype=np.complex128)
            frame[cols, :] = diagonal_clique_projection(m, k, tol).frame
            cert = certify(v, Projection.from_frame(frame), k, tol, seed=seed)
            if cert.kind is Kind.CLIQUE:
                return cert
            trace.append("clique branch failed to certify despite dim >= k^2+k-1")
        else:
            trace.append("no well-conditioned coordinate subset of size k^2+k-1")
    if k >= 2 and d * (k - 1) <= n - k:
        try:
            return anticlique_lowdim(v, k, seed=seed, tol=tol)
        except SearchBudgetError as exc:
            trace.append(f"anticlique branch exhausted: {exc}")
    else:
        if d < m:
            trace.append(
                f"neither branch applies: dim {d} in {m - 1}..{n} gap for n = {n}, k = {k}"
            )
    p = Projection.coordinate(n, range(k))
    return certify(v, p, k, tol, seed=seed, trace=tuple(trace))


# ---------------------------------------------------------------------------
# phase 1: small-orbit vectors
# ---------------------------------------------------------------------------


def _orbit_orthocomplement(v: OperatorSystem, vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Orthonormal frame of the joint orthocomplement of the orbits V·v_j."""
    n = v.n
    if not vectors:
        return np.eye(n, dtype=np.complex128)
    rows = []
    for w in vectors:
        rows.append(np.einsum("mij,j->mi", v.basis, w, optimize=True))
    stacked = np.concatenate(rows, axis=0)
    return scipy.linalg.null_space(stacked.conj())


def phase1_vector_search(
    v: OperatorSystem,
    existing: Sequence[np.ndarray],
    threshold: int,
    seed: int = 0,
    tol: Tolerance = DEFAULT_TOL,
) -> np.ndarray | None:
    """Unit vector orthogonal to all existing orbits with orbit dimension < threshold.

    Candidates come from eigenvectors of random Hermitian combinations of the
    compressed basis, the smallest right singular vectors of the stacked
    orbit map, and seeded random draws; the first candidate whose full orbit
    dimension is below the threshold wins.  ``None`` means no candidate
    qualified — a legitimate outcome, not an error.
    """
    frame = _orbit_orthocomplement(v, [as_vector(w, v.n) for w in existing])
    f = frame.shape[1]
    if f == 0:
        return None
    rng = derive_rng(seed, 0)
    candidates: list[np.ndarray] = []

    herm = hermitian_basis(v)
    comp = np.einsum("ia,mij,jb->mab", frame.conj(), herm, frame, optimize=True)
    for _ in range(3):
        weights = rng.standard_normal(comp.shape[0])
        mix = np.einsum("m,mab->ab", weights, comp)
        _, vecs = np.linalg.eigh(mix)
        candidates.extend(vecs.T)

    stacked = np.concatenate([a @ frame for a in v.basis], axis=0)
    _, _, vh = np.linalg.svd(stacked, full_matrices=False)
    for row in vh[max(0, vh.shape[0] - 3) :][::-1]:
        candidates.append(row.conj())

    for _ in range(8):
        z = rng.standard_normal(f) + 1j * rng.standard_normal(f)
        candidates.append(z / np.linalg.norm(z))

    for c in candidates:
        x = frame @ c
        norm = np.linalg.norm(x)
        if norm < 1e-12:
            continue
        x = x / norm
        if orbit_dim(v, x, tol) < threshold:
            return x
    return None


# ---------------------------------------------------------------------------
# phase 2: chains
# ---------------------------------------------------------------------------


def _forbidden_rows(
    ws: Sequence[np.ndarray], chain: Sequence[np.ndarray]
) -> np.ndarray:
    """Constraint rows: the next vector must be orthogonal to all of these."""
    rows = [w.conj() for w in ws]
    for b in chain:
        for w in ws:
            rows.append((b @ w).conj())
            rows.append((b.conj().T @ w).conj())
    return np.stack(rows)


def phase2_chain(
    v: OperatorSystem,
    steps: int,
    seed: int = 0,
    tol: Tolerance = DEFAULT_TOL,
) -> tuple[list[np.ndarray], list[np.ndarray], list[str]]:
    """Grow a chain A_r with w_{r+1} proportional to A_r·w_r, each new vector
    orthogonal to the span of all previous w_j, A_i·w_j and A_i*·w_j.

    Returns (vectors, chain matrices, notes).  The chain stops early when the
    orthogonality constraints leave no direction with a nonzero image — at
    desk scale that is the usual outcome and is recorded in the notes.
    """
    n = v.n
    rng = derive_rng(seed, 0)
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    ws: list[np.ndarray] = [z / np.linalg.norm(z)]
    chain: list[np.ndarray] = []
    notes: list[str] = []
    for r in range(steps):
        wr = ws[-1]
        m = np.stack([a @ wr for a in v.basis], axis=1)  # columns A_a w_r
        cons = _forbidden_rows(ws, chain) @ m
        null = scipy.linalg.null_space(cons)
        if null.shape[1] == 0:
            notes.append(f"chain stalled at step {r + 1}: constraints have no solution")
            break
        _, s, vh = np.linalg.svd(m @ null, full_matrices=False)
        if s[0] <= 1e-10:
            notes.append(f"chain stalled at step {r + 1}: feasible images all vanish")
            break
        coeff = null @ vh[0].conj()
        a_mat = np.einsum("a,aij->ij", coeff, v.basis, optimize=True)
        y = a_mat @ wr
        ny = float(np.linalg.norm(y))
        chain.append(a_mat)
        ws.append(y / ny)
    return ws, chain, notes


def _padding_vectors(
    v: OperatorSystem,
    ws: list[np.ndarray],
    chain: list[np.ndarray],
    count: int,
) -> list[np.ndarray] | None:
    """Extra orthonormal vectors on which every chain matrix acts invisibly."""
    extras: list[np.ndarray] = []
    for _ in range(count):
        rows = _forbidden_rows(ws + extras, chain)
        null = scipy.linalg.null_space(rows)
        if null.shape[1] == 0:
            return None
        extras.append(null[:, 0])
    return extras


def find_clique_or_anticlique(
    v: OperatorSystem,
    k: int,
    params: SearchParams | None = None,
    tol: Tolerance = DEFAULT_TOL,
) -> Certificate:
    """Top-level dichotomy search: phase 1, phase 2, then certified probes.

    Returns a certificate of Kind.CLIQUE or Kind.ANTICLIQUE when any stage
    lands one, and otherwise an honest Kind.NEITHER whose trace records what
    each stage did.  All stages re-certify against the original system before
    returning — nothing is trusted from the search itself.
    """
    if params is None:
        params = SearchParams.for_k(k)
    n = v.n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k = {k}")
    if k == 1:
        # dim(P V P) = 1 = k^2 for every rank-1 projection: I compresses to it.
        return certify(v, Projection.coordinate(n, [0]), 1, tol, seed=params.seed)

    trace: list[str] = []

    # ---- phase 1: accumulate small-orbit vectors ---------------------------
    vectors: list[np.ndarray] = []
    while len(vectors) < params.phase1_steps:
        vec = phase1_vector_search(
            v, vectors, params.orbit_threshold, derive_seed(params.seed, 1, len(vectors)), tol
        )
        if vec is None:
            trace.append(f"phase 1: stalled after {len(vectors)} vectors")
            break
        vectors.append(vec)
    else:
        trace.append(f"phase 1: collected all {len(vectors)} vectors")

    if vectors:
        w = np.stack(vectors, axis=1)
        s = len(vectors)
        diag_entries = np.einsum("ia,mij,ja->ma", w.conj(), v.basis, w, optimize=True)
        comp = np.einsum("ia,mij,jb->mab", w.conj(), v.basis, w, optimize=True)
        off = comp - np.einsum("ma,ab->mab", diag_entries, np.eye(s))
        off_resid = float(np.abs(off).max())
        scale = max(float(np.abs(comp).max()), 1e-300)
        if off_resid > 1e-8 * scale:
            trace.append(f"phase 1: compression not diagonal (residual {off_resid:.2e})")
        elif s < k:
            trace.append(f"phase 1: only {s} vectors for rank {k}")
        else:
            sub = from_span([np.diag(row) for row in diag_entries], s, tol)
            try:
                route = diagonal_route(sub, k, tol, seed=derive_seed(params.seed, 1, 10_000))
            except (ValueError, SearchBudgetError) as exc:
                route = None
                trace.append(f"phase 1: diagonal route failed: {exc}")
            if route is not None and route.kind is not Kind.NEITHER:
                lifted = Projection.from_frame(w @ route.projection.frame)
                cert = certify(v, lifted, k, tol, seed=params.seed, trace=tuple(trace))
                if cert.kind is not Kind.NEITHER:
                    return cert
                trace.append("phase 1: lifted certificate failed re-certification")
            elif route is not None:
                trace.append("phase 1: diagonal route returned neither")

    # ---- phase 2: chain to the staircase construction ----------------------
    m_chain = k**4 + k**3
    n_amb = m_chain + k - 1
    frame = _orbit_orthocomplement(v, vectors)
    residual: OperatorSystem | None
    if frame.shape[1] == n:
        residual = v
        frame = np.eye(n, dtype=np.complex128)
    elif frame.shape[1] >= n_amb:
        from .systems import compress_system

        residual = compress_system(v, Projection.from_frame(frame), tol)
    else:
        residual = None
        trace.append(
            f"phase 2: residual subspace dimension {frame.shape[1]} below chain ambient {n_amb}"
        )
    if residual is not None:
        steps = min(params.phase2_steps, m_chain)
        ws, chain, notes = phase2_chain(residual, steps, derive_seed(params.seed, 2), tol)
        trace.extend(f"phase 2: {note}" for note in notes)
        if len(chain) < m_chain:
            trace.append(f"phase 2: chain reached {len(chain)} of {m_chain} matrices")
        else:
            extras = _padding_vectors(residual, ws, chain, n_amb - len(ws))
            if extras is None:
                trace.append("phase 2: no padding coordinates available")
            else:
                iso = np.stack(list(ws) + extras, axis=1)  # (residual.n, n_amb)
                sub_basis = np.einsum(
                    "ia,mij,jb->mab", iso.conj(), residual.basis, iso, optimize=True
                )
                try:
                    sub = from_span(list(sub_basis), n_amb, tol)
                    comp_chain = np.einsum(
                        "ia,cij,jb->cab", iso.conj(), np.stack(chain), iso, optimize=True
                    )
                    sub_cert = blocks2_clique(
                        sub, comp_chain, k, seed=derive_seed(params.seed, 2, 1), tol=tol
                    )
                    lifted = Projection.from_frame(frame @ (iso @ sub_cert.projection.frame))
                    cert = certify(v, lifted, k, tol, seed=params.seed, trace=tuple(trace))
                    if cert.kind is Kind.CLIQUE:
                        return cert
                    trace.append("phase 2: lifted chain certificate failed re-certification")
                except (ValueError, SearchBudgetError) as exc:
                    trace.append(f"phase 2: staircase hand-off failed: {exc}")

    # ---- certified probes ---------------------------------------------------
    for t in range(params.retry_budget):
        p = random_projection(n, k, derive_seed(params.seed, 3, t))
        cert = certify(
            v, p, k, tol, seed=params.seed, trace=tuple(trace + [f"probe {t} certified"])
        )
        if cert.kind is not Kind.NEITHER:
            return cert
    trace.append(f"probes: {params.retry_budget} random projections certified neither")

    return certify(v, Projection.coordinate(n, range(k)), k, tol, seed=params.seed, trace=tuple(trace))
