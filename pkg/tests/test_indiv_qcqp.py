import numpy as np
import pytest

from relaybeam import fixtures
from relaybeam.channel import ChannelStats
from relaybeam.errors import InputError, ScopeError
from relaybeam.indiv_diag import solve_diagonal
from relaybeam.indiv_qcqp import (build_qcqp, grp_extract, qcqp_objective,
                                  rank_one_decompose, rescale_to_original,
                                  solve_via_sdp)
from relaybeam.linalg import qform
from relaybeam.problems import IndivPowerProblem
from conftest import degenerate_qcqp_instance, rand_indiv_problem


def fixture_problem(n):
    R, Q = fixtures.indiv_fixture(n)
    stats = ChannelStats(D=np.ones(n), R=R, Q=Q, sigma2=1.0)
    return IndivPowerProblem(stats=stats, Ps=1.0, P=np.full(n, 2.0))


class TestBuildQcqp:
    def test_fixture_unit_coeffs(self):
        p = fixture_problem(4)
        q = build_qcqp(p)
        assert np.allclose(q.scale_coeffs, 1.0)
        for k, Ak in enumerate(q.A):
            J = np.zeros((4, 4))
            J[k, k] = 1.0
            assert np.allclose(Ak, J + p.stats.Q)

    def test_zero_q_unit_box(self):
        stats = ChannelStats(D=np.ones(3), R=np.eye(3), Q=np.zeros((3, 3)),
                             sigma2=1.0)
        p = IndivPowerProblem(stats=stats, Ps=1.0, P=np.full(3, 2.0))
        q = build_qcqp(p)
        for k, Ak in enumerate(q.A):
            J = np.zeros((3, 3))
            J[k, k] = 1.0
            assert np.allclose(Ak, J)

    def test_single_relay(self):
        stats = ChannelStats(D=np.array([2.0]), R=np.eye(1), Q=np.eye(1),
                             sigma2=0.5)
        p = IndivPowerProblem(stats=stats, Ps=1.0, P=np.array([5.0]))
        q = build_qcqp(p)
        assert q.A[0][0, 0].real == pytest.approx((1.0 * 2.0 + 0.5) / 5.0 + 1.0)


class TestRescale:
    def test_saturating_point_unchanged(self, rng):
        p = rand_indiv_problem(rng, 4)
        q = build_qcqp(p)
        w = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        eta = (q.scale_coeffs * np.abs(w) ** 2).max()
        w = w / np.sqrt(eta)      # now the tightest cap is active
        sol = rescale_to_original(w, q, p)
        assert np.allclose(sol.w, w)

    def test_scale_invariance(self, rng):
        p = rand_indiv_problem(rng, 4)
        q = build_qcqp(p)
        w = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        s1 = rescale_to_original(w, q, p)
        s2 = rescale_to_original(2.0 * w, q, p)
        assert s1.snr == pytest.approx(s2.snr, rel=1e-12)
        assert np.allclose(s1.w, s2.w)

    def test_one_active_constraint(self, rng):
        for _ in range(10):
            p = rand_indiv_problem(rng, 5)
            q = build_qcqp(p)
            w = rng.standard_normal(5) + 1j * rng.standard_normal(5)
            sol = rescale_to_original(w, q, p)
            slack = sol.feasibility
            assert slack.min() >= -1e-9
            rel = slack / p.P
            assert rel.min() <= 1e-9   # at least one cap active

    def test_zero_vector_rejected(self, rng):
        p = rand_indiv_problem(rng, 3)
        q = build_qcqp(p)
        with pytest.raises(InputError):
            rescale_to_original(np.zeros(3), q, p)


class TestSolveViaSdp:
    @pytest.mark.parametrize("n", [4, 6])
    def test_fixture_rank_two_no_w(self, n):
        p = fixture_problem(n)
        q, sol, w = solve_via_sdp(p)
        assert sol.rank_estimate == 2
        assert w is None

    def test_diagonal_rank_one_matches_closed_form(self, rng):
        # a strongly dominant relay makes the relaxation optimum unique and
        # rank one; without dominance the optimal face can contain diagonal
        # optima of higher rank and the interior point converges inside it
        for _ in range(15):
            n = 3
            r = rng.uniform(0.05, 0.3, n)
            j = int(rng.integers(0, n))
            r[j] += 10.0
            stats = ChannelStats(D=rng.uniform(0.1, 2.0, n),
                                 R=np.diag(r).astype(complex),
                                 Q=np.diag(rng.uniform(0.5, 2.0, n)).astype(complex),
                                 sigma2=1.0)
            p = IndivPowerProblem(stats=stats, Ps=1.0, P=rng.uniform(0.5, 2.0, n))
            q, sol, w = solve_via_sdp(p)
            assert sol.rank_estimate == 1
            assert w is not None
            got = rescale_to_original(w, q, p)
            ref = solve_diagonal(p)
            assert got.snr == pytest.approx(ref.snr, rel=1e-6)


class TestRankOneDecompose:
    def test_already_rank_one(self, rng):
        p = rand_indiv_problem(rng, 3)
        q = build_qcqp(p)
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        v = v / np.sqrt(max(qform(Ak, v) for Ak in q.A))
        w = rank_one_decompose(np.outer(v, v.conj()), q)
        phase = np.vdot(w, v)
        align = abs(phase) / (np.linalg.norm(w) * np.linalg.norm(v))
        assert align == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("n", [2, 3])
    def test_degenerate_instances_audit(self, n, rng):
        count = 0
        while count < 25:
            prob, q = degenerate_qcqp_instance(rng, n)
            _, sol, _ = solve_via_sdp(prob)
            if sol.rank_estimate < 2:
                continue
            count += 1
            w = rank_one_decompose(sol.X, q)
            vals = q.constraint_values(w)
            assert vals.max() <= 1.0 + 1e-8
            assert qform(q.R, w) >= sol.primal_obj - 1e-6 * abs(sol.primal_obj)

    def test_scope_error_above_three(self):
        p = fixture_problem(4)
        q, sol, _ = solve_via_sdp(p)
        with pytest.raises(ScopeError):
            rank_one_decompose(sol.X, q)


class TestGrp:
    def test_deterministic_given_seed(self):
        p = fixture_problem(4)
        q, sol, _ = solve_via_sdp(p)
        w1 = grp_extract(sol.X, q, samples=20000, seed=5)
        w2 = grp_extract(sol.X, q, samples=20000, seed=5)
        assert np.array_equal(w1, w2)

    def test_prefix_monotonicity(self):
        p = fixture_problem(4)
        q, sol, _ = solve_via_sdp(p)
        objs = [qcqp_objective(q, grp_extract(sol.X, q, samples=s, seed=9))
                for s in (1000, 30000, 100000, 200000)]
        assert all(b >= a - 1e-12 for a, b in zip(objs, objs[1:]))

    def test_rank_one_covariance_degenerate(self, rng):
        p = rand_indiv_problem(rng, 3)
        q = build_qcqp(p)
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        X = np.outer(v, v.conj())
        w = grp_extract(X, q, samples=50, seed=1)
        # every sample is a scalar multiple of v, so the output is v rescaled
        vn = v / np.sqrt(max(qform(Ak, v) for Ak in q.A))
        align = abs(np.vdot(w, vn)) / (np.linalg.norm(w) * np.linalg.norm(vn))
        assert align == pytest.approx(1.0, abs=1e-12)
        # tiny spurious eigenvalues of the rank-one X perturb the norm at
        # sqrt(machine-eps) scale
        assert np.linalg.norm(w) == pytest.approx(np.linalg.norm(vn), rel=1e-7)

    def test_extraction_feasible_and_bounded(self, rng):
        p = fixture_problem(6)
        q, sol, _ = solve_via_sdp(p)
        w = grp_extract(sol.X, q, samples=50000, seed=3)
        vals = q.constraint_values(w)
        assert vals.max() <= 1.0 + 1e-8
        assert qform(q.R, w) <= sol.primal_obj + 1e-7

    def test_zero_x_rejected(self, rng):
        p = rand_indiv_problem(rng, 3)
        q = build_qcqp(p)
        with pytest.raises(InputError):
            grp_extract(np.zeros((3, 3)), q, samples=10, seed=0)
