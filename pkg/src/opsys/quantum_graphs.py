"""Operator systems over block *-algebras: quantum graphs.

A block algebra ⊕_i (M_{n_i} ⊗ I_{d_i}) plays the role the vertex set plays
for a classical graph; the operator system must be a bimodule over the
algebra's commutant.  Cliques and anticliques generalize by comparing the
compression P·V·P against P·M_n·P and P·M′·P for projections P inside the
algebra, and the unified search reduces to either the single-algebra
dichotomy (via a tensor factorization) or a classical Ramsey extraction on
the graph induced by the block components.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .constructions import SimpleGraph
from .linalg import DEFAULT_TOL, Projection, Tolerance, rank_at
from .ramsey import SearchParams, find_clique_or_anticlique
from .systems import (
    Certificate,
    Kind,
    OperatorSystem,
    derive_rng,
    derive_seed,
    from_span,
)

__all__ = [
    "MatrixAlgebra",
    "QuantumGraph",
    "commutant",
    "is_bimodule",
    "generalized_certify",
    "classical_ramsey_extract",
    "general_find",
    "block_restriction",
    "tensor_factor",
]


@dataclass(frozen=True, eq=False)
class MatrixAlgebra:
    """A *-subalgebra ⊕_i (M_{n_i} ⊗ I_{d_i}) of M_n with an explicit layout.

    ``coords[i]`` is an (n_i, d_i) integer array: the ambient index of tensor
    position (a, b) within block i.  The layout makes the commutant exact —
    swap the block shape and transpose the coordinate array.
    """

    blocks: tuple[tuple[int, int], ...]
    coords: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.blocks) != len(self.coords) or not self.blocks:
            raise ValueError("need one coordinate array per block")
        seen = []
        for (ni, di), cs in zip(self.blocks, self.coords):
            if ni < 1 or di < 1:
                raise ValueError("block dimensions must be positive")
            if cs.shape != (ni, di):
                raise ValueError(f"coordinate array for block ({ni},{di}) has shape {cs.shape}")
            seen.append(cs.ravel())
        flat = np.sort(np.concatenate(seen))
        if not np.array_equal(flat, np.arange(self.n)):
            raise ValueError("block coordinates must partition 0..n-1")

    @classmethod
    def from_blocks(cls, blocks) -> "MatrixAlgebra":
        """Contiguous layout: block i occupies the next n_i·d_i indices."""
        blocks = tuple((int(a), int(b)) for a, b in blocks)
        coords = []
        offset = 0
        for ni, di in blocks:
            coords.append(np.arange(offset, offset + ni * di).reshape(ni, di))
            offset += ni * di
        return cls(blocks, tuple(coords))

    @classmethod
    def full(cls, n: int) -> "MatrixAlgebra":
        return cls.from_blocks([(n, 1)])

    @classmethod
    def diagonal(cls, n: int) -> "MatrixAlgebra":
        return cls.from_blocks([(1, 1)] * n)

    @property
    def n(self) -> int:
        return sum(ni * di for ni, di in self.blocks)

    @property
    def dim(self) -> int:
        return sum(ni * ni for ni, _ in self.blocks)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MatrixAlgebra):
            return NotImplemented
        return self.blocks == other.blocks and all(
            np.array_equal(a, b) for a, b in zip(self.coords, other.coords)
        )

    __hash__ = None  # type: ignore[assignment]

    @cached_property
    def basis(self) -> np.ndarray:
        """Orthonormal basis (dim, n, n): matrix units tensored with I/√d_i."""
        n = self.n
        units = []
        for (ni, di), cs in zip(self.blocks, self.coords):
            w = 1.0 / np.sqrt(di)
            for a in range(ni):
                for b in range(ni):
                    u = np.zeros((n, n), dtype=np.complex128)
                    u[cs[a, :], cs[b, :]] = w
                    units.append(u)
        return np.stack(units)

    def contains(self, a: np.ndarray, rel: float = 1e-9) -> bool:
        a = np.asarray(a, dtype=np.complex128)
        coeffs = np.einsum("mij,ij->m", self.basis.conj(), a)
        resid = a - np.einsum("m,mij->ij", coeffs, self.basis)
        return float(np.linalg.norm(resid)) <= rel * max(1.0, float(np.linalg.norm(a)))


def commutant(m: MatrixAlgebra) -> MatrixAlgebra:
    """The commutant: each block (n_i, d_i) becomes (d_i, n_i) in place."""
    return MatrixAlgebra(
        tuple((di, ni) for ni, di in m.blocks),
        tuple(np.ascontiguousarray(cs.T) for cs in m.coords),
    )


def is_bimodule(v: OperatorSystem, m: MatrixAlgebra, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Whether M′·V·M′ = V, by a mutual span-rank test.

    The span of {X·A·Y} over commutant basis elements X, Y and A ∈ V always
    contains V (the commutant is unital), so the test reduces to the rank of
    that span being dim(V) both alone and jointly with V's basis.
    """
    if v.n != m.n:
        raise ValueError("ambient dimensions differ")
    xs = commutant(m).basis
    t1 = np.einsum("xij,ajk->xaik", xs, v.basis, optimize=True)
    prods = np.einsum("xaik,ykl->xayil", t1, xs, optimize=True)
    rows = prods.reshape(-1, v.n * v.n)
    s = np.linalg.svd(rows, compute_uv=False)
    if rank_at(s, tol.rank_rel) != v.dim:
        return False
    joint = np.concatenate([rows, v.basis.reshape(v.dim, -1)], axis=0)
    s2 = np.linalg.svd(joint, compute_uv=False)
    return rank_at(s2, tol.rank_rel) == v.dim


@dataclass(frozen=True, eq=False)
class QuantumGraph:
    """An operator system paired with a block algebra it is a bimodule over."""

    algebra: MatrixAlgebra
    system: OperatorSystem

    def __post_init__(self) -> None:
        if self.algebra.n != self.system.n:
            raise ValueError("algebra and system live on different ambient dimensions")
        if not is_bimodule(self.system, self.algebra):
            raise ValueError("system is not a bimodule over the algebra's commutant")


def _dual_rank(rows: np.ndarray, tol: Tolerance) -> tuple[int, int]:
    s = np.linalg.svd(rows, compute_uv=False)
    return rank_at(s, tol.rank_rel), rank_at(s, tol.cert_rel)


def generalized_certify(
    qg: QuantumGraph,
    p: Projection,
    k: int,
    tol: Tolerance = DEFAULT_TOL,
    seed: int | None = None,
    trace: tuple[str, ...] = (),
) -> Certificate:
    """Certify a projection inside the algebra as a generalized (anti)clique.

    Clique: dim(PVP) = k² (so PVP is everything a rank-k compression can be);
    anticlique: PVP and PM′P have equal dimension and equal joint span.  The
    projection must lie in the algebra — that is checked, not assumed — and
    any disagreement between the search and certification tolerances yields
    Neither with an explanatory trace.
    """
    m, v = qg.algebra, qg.system
    if p.n != v.n:
        raise ValueError("projection ambient dimension does not match the system")
    if k != p.k:
        raise ValueError(f"projection rank {p.k} does not match k = {k}")
    pm = p.matrix
    scale = max(1.0, float(np.linalg.norm(pm)))
    coeffs = np.einsum("mij,ij->m", m.basis.conj(), pm)
    resid = pm - np.einsum("m,mij->ij", coeffs, m.basis)
    if float(np.linalg.norm(resid)) > 1e-9 * scale:
        raise ValueError("projection does not lie in the algebra's span")
    comm_basis = commutant(m).basis
    comm_resid = float(
        max(np.linalg.norm(pm @ x - x @ pm) for x in comm_basis)
    )
    if comm_resid > 1e-9 * scale:
        raise ValueError("projection does not commute with the algebra's commutant")

    rows_v = p.compress_stack(v.basis).reshape(v.dim, -1)
    rows_c = p.compress_stack(comm_basis).reshape(comm_basis.shape[0], -1)
    dv_rank, dv_cert = _dual_rank(rows_v, tol)
    dc_rank, dc_cert = _dual_rank(rows_c, tol)
    du_rank, du_cert = _dual_rank(np.concatenate([rows_v, rows_c], axis=0), tol)
    if (dv_rank, dc_rank, du_rank) != (dv_cert, dc_cert, du_cert):
        return Certificate(
            projection=p,
            kind=Kind.NEITHER,
            compressed_dim=dv_rank,
            k=k,
            tol=tol,
            seed=seed,
            trace=trace
            + (
                "ambiguous compression rank between search and certification tolerances: "
                f"PVP {dv_rank}/{dv_cert}, PM'P {dc_rank}/{dc_cert}, joint {du_rank}/{du_cert}",
            ),
            commutant_dim=dc_rank,
        )
    if dv_rank == k * k:
        kind = Kind.CLIQUE
    elif dv_rank == dc_rank == du_rank:
        kind = Kind.ANTICLIQUE
    else:
        kind = Kind.NEITHER
    return Certificate(
        projection=p,
        kind=kind,
        compressed_dim=dv_rank,
        k=k,
        tol=tol,
        seed=seed,
        trace=trace,
        commutant_dim=dc_rank,
    )


# ---------------------------------------------------------------------------
# classical bridge
# ---------------------------------------------------------------------------


def _find_k_clique(adj: list[int], k: int) -> list[int] | None:
    """Backtracking search for a k-clique over bitmask adjacency."""
    n = len(adj)

    def extend(current: list[int], cand: int) -> list[int] | None:
        if len(current) == k:
            return current
        if len(current) + cand.bit_count() < k:
            return None
        m = cand
        while m:
            low = m & -m
            vtx = low.bit_length() - 1
            m ^= low
            got = extend(current + [vtx], m & adj[vtx])
            if got is not None:
                return got
        return None

    return extend([], (1 << n) - 1)


def classical_ramsey_extract(
    g: SimpleGraph, k: int
) -> tuple[tuple[int, ...], Kind] | None:
    """A k-clique or k-independent-set of a classical graph, or None.

    None is a legitimate outcome below the Ramsey threshold; above it one of
    the two always exists.  Vertices are returned 1-indexed and sorted.
    """
    n = g.n_vertices
    if k < 1:
        raise ValueError("need k >= 1")
    if k > n:
        return None
    adj = [0] * n
    for i, j in g.edges:
        adj[i - 1] |= 1 << (j - 1)
        adj[j - 1] |= 1 << (i - 1)
    found = _find_k_clique(adj, k)
    if found is not None:
        return tuple(sorted(x + 1 for x in found)), Kind.CLIQUE
    full = (1 << n) - 1
    comp = [full & ~adj[x] & ~(1 << x) for x in range(n)]
    found = _find_k_clique(comp, k)
    if found is not None:
        return tuple(sorted(x + 1 for x in found)), Kind.ANTICLIQUE
    return None


# ---------------------------------------------------------------------------
# the unified search
# ---------------------------------------------------------------------------


def block_restriction(v: OperatorSystem, m: MatrixAlgebra, i: int) -> OperatorSystem:
    """V compressed to block i's coordinates, in the (a, b) tensor ordering."""
    idx = m.coords[i].reshape(-1)
    sub = v.basis[:, idx[:, None], idx]
    return from_span(list(sub), idx.size)


def tensor_factor(
    vb: OperatorSystem, ni: int, di: int, tol: Tolerance = DEFAULT_TOL
) -> OperatorSystem | None:
    """Extract W with vb = W ⊗ M_d, verifying the reconstruction; None if not."""
    if vb.n != ni * di:
        raise ValueError("block system dimension does not match (n_i, d_i)")
    mats = vb.basis.reshape(vb.dim, ni, di, ni, di)
    slices = mats.transpose(0, 2, 4, 1, 3).reshape(vb.dim * di * di, ni, ni)
    w = from_span(list(slices), ni, tol)
    if w.dim * di * di != vb.dim:
        return None
    recon = []
    unit = np.zeros((di, di), dtype=np.complex128)
    for e in w.basis:
        for b in range(di):
            for bp in range(di):
                unit[b, bp] = 1.0
                recon.append(np.kron(e, unit))
                unit[b, bp] = 0.0
    joint = np.concatenate(
        [np.stack(recon).reshape(len(recon), -1), vb.basis.reshape(vb.dim, -1)], axis=0
    )
    s = np.linalg.svd(joint, compute_uv=False)
    if rank_at(s, tol.rank_rel) != vb.dim:
        return None
    return w


def _embedded_frame(
    m: MatrixAlgebra, i: int, q_frame: np.ndarray
) -> np.ndarray:
    """Ambient frame for (q ⊗ I_{d_i}) supported on block i."""
    ni, di = m.blocks[i]
    cs = m.coords[i]
    cols = []
    for a in range(q_frame.shape[1]):
        for b in range(di):
            col = np.zeros(m.n, dtype=np.complex128)
            col[cs[:, b]] = q_frame[:, a]
            cols.append(col)
    return np.stack(cols, axis=1)


def _random_block_unit(m: MatrixAlgebra, i: int, rng: np.random.Generator) -> np.ndarray:
    ni = m.blocks[i][0]
    z = rng.standard_normal(ni) + 1j * rng.standard_normal(ni)
    return (z / np.linalg.norm(z)).reshape(ni, 1)


def _induced_block_graph(v: OperatorSystem, m: MatrixAlgebra) -> SimpleGraph:
    """Edge between blocks i ≠ j iff some basis element has support across them."""
    r = len(m.blocks)
    scale = max(float(np.abs(v.basis).max()), 1e-300)
    edges = []
    for i in range(r):
        ri = m.coords[i].reshape(-1)
        for j in range(i + 1, r):
            rj = m.coords[j].reshape(-1)
            cross = v.basis[:, ri[:, None], rj]
            if float(np.abs(cross).max()) > 1e-8 * scale:
                edges.append((i + 1, j + 1))
    return SimpleGraph.from_edges(r, edges)


def general_find(
    qg: QuantumGraph,
    k: int,
    params: SearchParams | None = None,
    tol: Tolerance = DEFAULT_TOL,
) -> Certificate:
    """Generalized clique-or-anticlique search over a quantum graph.

    Mirrors the structure of the underlying argument: a single full block
    delegates to the plain dichotomy search; a block with multiplicity
    d_i ≥ k certifies immediately; otherwise each block is tried through the
    tensor factorization (largest n_i·d_i first), and finally the induced
    classical graph on blocks goes through the classical Ramsey extraction.
    The returned projection always lies in the algebra and may have rank
    larger than k; Neither-with-trace is the honest desk-scale fallback.
    """
    v, m = qg.system, qg.algebra
    n = v.n
    if params is None:
        params = SearchParams.for_k(k)
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k = {k}")
    r = len(m.blocks)
    if r == 1 and m.blocks[0][1] == 1:
        return find_clique_or_anticlique(v, k, params, tol)

    trace: list[str] = []
    order = sorted(range(r), key=lambda i: -(m.blocks[i][0] * m.blocks[i][1]))

    for i in order:
        ni, di = m.blocks[i]
        if di >= k:
            q = _random_block_unit(m, i, derive_rng(params.seed, 4, i))
            p = Projection.from_frame(_embedded_frame(m, i, q))
            cert = generalized_certify(qg, p, di, tol, seed=params.seed, trace=tuple(trace))
            if cert.kind is not Kind.NEITHER:
                return cert
            trace.append(f"block {i}: multiplicity {di} >= k but certification failed")

    for i in order:
        ni, di = m.blocks[i]
        ksub = -(-k // di)
        if ksub > ni or ni < 2:
            continue
        vb = block_restriction(v, m, i)
        w = tensor_factor(vb, ni, di, tol)
        if w is None:
            trace.append(f"block {i}: tensor factorization check failed")
            continue
        sub_params = SearchParams(
            params.orbit_threshold,
            params.phase1_steps,
            params.phase2_steps,
            params.retry_budget,
            derive_seed(params.seed, 6, i),
        )
        sub_cert = find_clique_or_anticlique(w, ksub, sub_params, tol)
        if sub_cert.kind is Kind.NEITHER:
            trace.append(f"block {i}: factor search returned neither")
            continue
        p = Projection.from_frame(_embedded_frame(m, i, sub_cert.projection.frame))
        cert = generalized_certify(qg, p, ksub * di, tol, seed=params.seed, trace=tuple(trace))
        if cert.kind is not Kind.NEITHER:
            return cert
        trace.append(f"block {i}: lifted tensor certificate failed re-certification")

    if r >= k:
        graph = _induced_block_graph(v, m)
        got = classical_ramsey_extract(graph, k)
        if got is None:
            trace.append(f"classical route: no k-set in the {r}-block induced graph")
        else:
            verts, kind = got
            for t in range(params.retry_budget):
                frames = [
                    _embedded_frame(
                        m, i - 1, _random_block_unit(m, i - 1, derive_rng(params.seed, 5, t, i))
                    )
                    for i in verts
                ]
                p = Projection.from_frame(np.concatenate(frames, axis=1))
                cert = generalized_certify(qg, p, p.k, tol, seed=params.seed, trace=tuple(trace))
                if cert.kind is kind:
                    return cert
            trace.append(
                f"classical route: extracted {kind.value} on blocks {verts} "
                f"failed certification in {params.retry_budget} draws"
            )
    else:
        trace.append(f"classical route: only {r} blocks for k = {k}")

    rank = 0
    frames = []
    for i in order:
        if rank >= k:
            break
        ni, di = m.blocks[i]
        take = min(ni, -(-(k - rank) // di))
        q = np.zeros((ni, take), dtype=np.complex128)
        q[np.arange(take), np.arange(take)] = 1.0
        frames.append(_embedded_frame(m, i, q))
        rank += take * di
    p = Projection.from_frame(np.concatenate(frames, axis=1))
    trace.append("fallback projection certified honestly")
    return generalized_certify(qg, p, p.k, tol, seed=params.seed, trace=tuple(trace))
