import numpy as np
import pytest

from opsys.linalg import numerical_rank
from opsys.ramsey import (
    SearchParams,
    diagonal_route,
    find_clique_or_anticlique,
    phase1_vector_search,
    phase2_chain,
)
from opsys.systems import (
    Kind,
    certify,
    from_span,
    orbit_dim,
    random_diagonal_system,
    random_system,
)
from opsys.constructions import diagonal_system


class TestSearchParams:
    def test_for_k_formulae(self):
        p = SearchParams.for_k(2)
        assert (p.orbit_threshold, p.phase1_steps, p.phase2_steps) == (
            8 * 2**8,
            2**3,
            2 * 2**4,
        )
        p = SearchParams.for_k(3, seed=5, retry_budget=2)
        assert p.orbit_threshold == 8 * 3**8
        assert p.seed == 5 and p.retry_budget == 2

    def test_rejects_non_positive_budgets(self):
        with pytest.raises(ValueError):
            SearchParams(0, 1, 1)
        with pytest.raises(ValueError):
            SearchParams(1, 1, 1, retry_budget=0)
        with pytest.raises(ValueError):
            SearchParams(1, 1, 1, seed=-1)

    def test_for_k_rejects_zero(self):
        with pytest.raises(ValueError):
            SearchParams.for_k(0)


class TestDiagonalRoute:
    def test_clique_branch(self):
        # dim 5 >= 2^2+2-1 forces the clique branch
        v = diagonal_system(7)
        cert = diagonal_route(v, 2)
        assert cert.kind is Kind.CLIQUE
        assert cert.compressed_dim == 4

    def test_anticlique_branch(self):
        # dim 2 with (n-k)/(k-1) = 5 forces the anticlique branch
        v = random_diagonal_system(7, 2, seed=0)
        cert = diagonal_route(v, 2)
        assert cert.kind is Kind.ANTICLIQUE

    def test_never_neither_at_guaranteed_scale(self):
        # n = 7 = k^3 - k + 1 for k = 2: every dimension lands in a branch
        for d in range(1, 8):
            for seed in range(5):
                v = random_diagonal_system(7, d, seed=seed)
                cert = diagonal_route(v, 2, seed=seed)
                assert cert.kind is not Kind.NEITHER, (d, seed, cert.trace)

    def test_non_diagonal_input_rejected(self):
        v = random_system(5, 3, seed=1)
        with pytest.raises(ValueError, match="diagonal"):
            diagonal_route(v, 2)

    def test_k_out_of_range(self):
        v = diagonal_system(4)
        with pytest.raises(ValueError):
            diagonal_route(v, 5)
        with pytest.raises(ValueError):
            diagonal_route(v, 0)

    def test_gap_is_traced(self):
        # n = 5, k = 2, dim 4: neither branch applies (4 < 5 and 4 > 3)
        v = random_diagonal_system(5, 4, seed=3)
        cert = diagonal_route(v, 2, seed=3)
        if cert.kind is Kind.NEITHER:
            assert cert.trace

    def test_deterministic(self):
        v = random_diagonal_system(9, 4, seed=7)
        a = diagonal_route(v, 2, seed=11)
        b = diagonal_route(v, 2, seed=11)
        assert a.kind is b.kind
        assert np.array_equal(a.projection.frame, b.projection.frame)


class TestPhase1:
    def test_vector_has_small_orbit_and_is_orthogonal(self):
        # a system with an invariant coordinate subspace has small orbits
        mats = [np.zeros((6, 6), dtype=complex) for _ in range(2)]
        mats[0][0, 1] = mats[0][1, 0] = 1.0
        mats[1][0, 0] = 1.0
        v = from_span(mats, 6)
        w = phase1_vector_search(v, [], threshold=4, seed=0)
        assert w is not None
        assert np.linalg.norm(w) == pytest.approx(1.0)
        assert orbit_dim(v, w) < 4

        orbit = np.einsum("mij,j->mi", v.basis, w)
        w2 = phase1_vector_search(v, [w], threshold=4, seed=0)
        if w2 is not None:
            assert np.abs(orbit.conj() @ w2).max() < 1e-8

    def test_full_algebra_has_no_small_orbits(self):
        v = random_system(4, 16, seed=2)
        assert phase1_vector_search(v, [], threshold=4, seed=0) is None

    def test_exhausted_space_returns_none(self):
        v = from_span([], 3)
        vecs = [np.eye(3)[i] for i in range(3)]
        assert phase1_vector_search(v, vecs, threshold=2, seed=0) is None


class TestPhase2:
    def test_chain_relations(self):
        v = random_system(24, 3, seed=4)
        ws, chain, notes = phase2_chain(v, steps=4, seed=0)
        assert len(ws) == len(chain) + 1
        for r, a in enumerate(chain):
            img = a @ ws[r]
            # w_{r+1} is proportional to A_r w_r
            assert numerical_rank([img, ws[r + 1]]) == 1
            assert v.contains(a)
        # each new vector is orthogonal to all previous ws
        for i in range(len(ws)):
            for j in range(i):
                assert abs(ws[i].conj() @ ws[j]) < 1e-8

    def test_small_ambient_stops_early_with_notes(self):
        v = random_system(4, 3, seed=5)
        ws, chain, notes = phase2_chain(v, steps=50, seed=0)
        assert len(chain) < 50
        assert notes


class TestFind:
    def test_k_one_is_immediate(self):
        v = random_system(5, 7, seed=0)
        cert = find_clique_or_anticlique(v, 1)
        assert cert.kind is Kind.CLIQUE
        assert cert.compressed_dim == 1

    def test_desk_scale_dichotomy(self):
        # n = 16 comfortably above k^3 - k + 1 = 7 for k = 2
        for d in range(1, 11):
            v = random_system(16, d, seed=d)
            params = SearchParams.for_k(2, seed=d)
            cert = find_clique_or_anticlique(v, 2, params)
            assert cert.kind is not Kind.NEITHER, (d, cert.trace)
            re = certify(v, cert.projection, 2)
            assert re.kind is cert.kind

    def test_deterministic(self):
        v = random_system(12, 5, seed=9)
        params = SearchParams.for_k(2, seed=21)
        a = find_clique_or_anticlique(v, 2, params)
        b = find_clique_or_anticlique(v, 2, params)
        assert a.kind is b.kind
        assert np.array_equal(a.projection.frame, b.projection.frame)

    def test_retry_budget_monotone(self):
        # enlarging the retry budget never flips a found certificate to
        # Neither: probe seeds are derived independently of the budget
        for seed in range(6):
            v = random_system(9, 6, seed=seed)
            small = find_clique_or_anticlique(
                v, 2, SearchParams(64, 2, 4, retry_budget=2, seed=seed)
            )
            large = find_clique_or_anticlique(
                v, 2, SearchParams(64, 2, 4, retry_budget=24, seed=seed)
            )
            if small.kind is not Kind.NEITHER:
                assert large.kind is small.kind

    def test_certificates_always_sound(self):
        # whatever the verdict, the reported projection and dimension re-verify
        for seed in range(8):
            n = 6 + seed
            d = 1 + (seed * 3) % (n + 2)
            v = random_system(n, d, seed=seed + 100)
            cert = find_clique_or_anticlique(v, 2, SearchParams.for_k(2, seed=seed))
            re = certify(v, cert.projection, 2)
            assert re.kind is cert.kind
            assert re.compressed_dim == cert.compressed_dim

    def test_scalars_anticlique(self):
        v = from_span([], 8)
        cert = find_clique_or_anticlique(v, 3, SearchParams.for_k(3))
        assert cert.kind is Kind.ANTICLIQUE

    def test_full_algebra_clique(self):
        v = random_system(4, 16, seed=1)
        cert = find_clique_or_anticlique(v, 2, SearchParams.for_k(2))
        assert cert.kind is Kind.CLIQUE
