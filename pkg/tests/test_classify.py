"""Endomorphism classifier: commutant, constraints, nullspace oracle."""
import numpy as np
import pytest

from lcqft import classify as clf
from lcqft import dynamics as dyn
from lcqft.errors import BudgetExceeded
from lcqft.spacetime import LatticeSpacetime, MassSpectrum

from oracles import dense_commutant_dimension


def _st(spec, n=8, steps=16):
    return LatticeSpacetime(n, steps, 0.5, MassSpectrum.parse(spec))


class TestCommutant:
    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            clf.build_commutant_basis(_st("1:1", n=32, steps=8))

    def test_mode_counting_oracle(self):
        # real dimension 2 N sum_m nu(m)^2: two complex dimensions per species
        # pair per momentum (span of identity and the one-step mode map)
        for spec in ("1:1", "1:2", "0:1,1:2", "1:2,2:3"):
            st = _st(spec)
            basis = clf.build_commutant_basis(st)
            assert basis.dimension == clf.expected_commutant_dimension(st)

    def test_dense_intersection_oracle_tiny(self):
        # the production (block-circulant + dense evolution nullspace) result
        # agrees with the literal two-sided dense commutant intersection
        st = _st("1:1", n=4, steps=8)
        production = clf.build_commutant_basis(st).dimension
        oracle = dense_commutant_dimension(dyn.shift_matrix(st),
                                           dyn.one_step_matrix(st))
        assert production == oracle == 2 * 4 * 1

    def test_elements_commute(self, rng):
        st = _st("1:2")
        basis = clf.build_commutant_basis(st)
        U = dyn.one_step_matrix(st)
        P = dyn.shift_matrix(st)
        for i in range(0, basis.dimension, 7):
            G = basis.matrices[i]
            assert np.max(np.abs(G @ U - U @ G)) < 1e-10
            assert np.max(np.abs(G @ P - P @ G)) < 1e-12

    def test_contains_identity_and_mode_rotations(self):
        st = _st("1:1")
        basis = clf.build_commutant_basis(st)
        flat = basis.matrices.reshape(basis.dimension, -1)
        dim = st.data_dim

        def in_span(M):
            v = M.ravel()
            coeff, *_ = np.linalg.lstsq(flat.T, v, rcond=None)
            return np.linalg.norm(flat.T @ coeff - v) < 1e-9 * max(
                1.0, np.linalg.norm(v))

        assert in_span(np.eye(dim))
        assert in_span(dyn.one_step_matrix(st))  # per-mode phase rotations

    def test_so_generators_are_members(self):
        st = _st("1:2,2:3")
        basis = clf.build_commutant_basis(st)
        flat = basis.matrices.reshape(basis.dimension, -1)
        for G in clf.expected_so_generators(st):
            v = G.ravel()
            coeff, *_ = np.linalg.lstsq(flat.T, v, rcond=None)
            assert np.linalg.norm(flat.T @ coeff - v) \
                < 1e-12 * np.linalg.norm(v)


class TestConstraints:
    def test_so_rows_vanish(self, rng):
        st = _st("1:2")
        gens = clf.expected_so_generators(st)
        points = clf.default_sample_points(st)
        for _ in range(5):
            vec = rng.standard_normal(st.data_dim)
            rows = clf.constraint_rows_for_solution(gens, vec, st, points)
            assert np.max(np.abs(rows)) < 1e-12

    def test_symmetric_species_matrix_violates(self, rng):
        # the trace direction (identity on one block) scales the energy
        st = _st("1:2")
        dim = st.data_dim
        gens = np.eye(dim)[None, :, :]
        vec = rng.standard_normal(dim)
        rows = clf.constraint_rows_for_solution(
            gens, vec, st, clf.default_sample_points(st))
        assert np.max(np.abs(rows)) > 1e-2

    def test_mode_dependent_rotation_violates(self, rng):
        # a phase rotation on a single momentum pair commutes with shift and
        # evolution but fails pointwise null-energy preservation
        st = _st("1:1")
        N, dt = st.n_sites, st.dt
        k = 2
        x = np.arange(N)
        proj = np.cos(2 * np.pi * k * (x[:, None] - x[None, :]) / N) * 2 / N
        w2 = 1.0 + 4 * np.sin(np.pi * k / N) ** 2
        s = np.sqrt(dt * dt * w2 * (1 - dt * dt * w2 / 4))
        G = np.zeros((st.data_dim, st.data_dim))
        half = st.data_dim // 2
        G[:half, half:] = (dt / s) * proj
        G[half:, :half] = -(s / dt) * proj
        U = dyn.one_step_matrix(st)
        assert np.max(np.abs(G @ U - U @ G)) < 1e-12  # genuinely in commutant
        vec = rng.standard_normal(st.data_dim)
        rows = clf.constraint_rows_for_solution(
            G[None], vec, st, clf.default_sample_points(st))
        assert np.max(np.abs(rows)) > 1e-3

    def test_spec_level_operation(self, rng):
        st = _st("1:2")
        gens = clf.expected_so_generators(st)
        sols = [dyn.random_solution(rng, st, complex_data=False)
                for _ in range(3)]
        samples = [(sol, t, x, sign) for sol in sols
                   for (t, x, sign) in [(0, 1, +1), (3, 4, -1)]]
        system = clf.linearized_set_constraints(gens, samples, st)
        assert system.rows.shape == (6, gens.shape[0])
        assert np.max(np.abs(system.rows)) < 1e-12


class TestClassify:
    @pytest.mark.parametrize("spec,expected", [
        ("1:1", 0), ("1:2", 1), ("1:3", 3), ("1:2,2:3", 4)])
    def test_expected_dimensions(self, spec, expected):
        report = clf.classify(_st(spec), seed=0)
        assert report["dimension"] == expected
        assert report["expected"] == expected
        assert report["match"] is True
        assert report["max_principal_angle"] < 1e-9

    def test_seed_stability(self):
        st = _st("1:2")
        dims = {clf.classify(st, seed=s)["dimension"] for s in range(5)}
        assert dims == {1}

    def test_soundness_residuals(self):
        report = clf.classify(_st("1:3"), seed=1)
        res = report["residuals"]
        assert res["soundness_sigma"] < 1e-10
        assert res["soundness_null_energy"] < 1e-9
        assert res["soundness_rce_commute"] < 1e-8
        assert res["reflection_null_energy"] < 1e-12

    def test_generators_exponentiate_to_block_rotations(self):
        report = clf.classify(_st("1:2"), seed=0)
        gen = np.array(report["generators"][0])
        from lcqft._linalg import expm_taylor
        S_map = expm_taylor(gen)
        # the exponential acts identically on q and p channels and mixes only
        # species within the block
        st = _st("1:2")
        N = st.n_sites
        half = st.data_dim // 2
        qq = S_map[:half, :half]
        pp = S_map[half:, half:]
        assert np.max(np.abs(qq - pp)) < 1e-12
        R = qq[::N, ::N]
        assert np.max(np.abs(R.T @ R - np.eye(2))) < 1e-12

    def test_zero_mode_quarantine(self):
        report = clf.classify(_st("0:1,1:2"), seed=0, quantized=True)
        assert report["zero_mode_dimension"] == 2  # 2 nu(0)^2
        assert report["match"] is True
        assert report["dimension"] == 1
        assert any("quarantined" in line for line in report["findings"])
        report2 = clf.classify(_st("0:2"), seed=0, quantized=True)
        assert report2["zero_mode_dimension"] == 8
        assert report2["dimension"] == 1  # so(2)

    def test_affine_directions(self):
        report = clf.classify(_st("0:2"), seed=0, quantized=True)
        assert report["affine"]["dimension"] == 2
        assert report["affine"]["residual"] < 1e-10

    def test_plateau_history_recorded(self):
        report = clf.classify(_st("1:2"), seed=3)
        hist = report["nullity_history"]
        assert len(hist) == 4
        assert hist[-1] == hist[-2] == hist[-3]

    def test_report_schema(self):
        report = clf.classify(_st("1:2"), seed=0)
        for key in ("dimension", "expected", "match", "generators",
                    "residuals", "zero_mode_dimension", "commutant_dimension"):
            assert key in report
        assert len(report["generators"]) == report["dimension"]


class TestInsufficientSamples:
    def test_thin_point_set_fails_plateau(self):
        # a single sampled point cannot pin the constraint rank: the nullity
        # keeps shrinking batch after batch and the plateau check raises
        from lcqft.errors import InsufficientSamples
        st = _st("1:2")
        with pytest.raises(InsufficientSamples):
            clf.classify(st, seed=0, sample_points=[(0, 0, +1)])
