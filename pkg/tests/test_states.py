"""Quasifree states: kernel invariants, Wick evaluation, pullbacks."""
import numpy as np
import pytest

from lcqft import algebra as alg
from lcqft import dynamics as dyn
from lcqft import gauge as gg
from lcqft import states as stt
from lcqft.errors import DegreeCapExceeded
from lcqft.kinematics import solution_map
from lcqft.spacetime import translation

from oracles import reduction_evaluate


class TestKernel:
    def test_imaginary_part_is_half_sigma(self, mixed_spacetime, rng):
        vac = stt.vacuum_state(mixed_spacetime)
        W = vac.two_point
        for _ in range(20):
            a = dyn.random_solution(rng, mixed_spacetime, complex_data=False)
            b = dyn.random_solution(rng, mixed_spacetime, complex_data=False)
            w_ab = a.vec() @ W @ b.vec()
            assert abs(w_ab.imag - 0.5 * dyn.symplectic_form(a, b).real) < 1e-11

    def test_positive_semidefinite(self, mixed_spacetime, rng):
        vac = stt.vacuum_state(mixed_spacetime)
        W = vac.two_point
        for _ in range(50):
            phi = dyn.random_solution(rng, mixed_spacetime)
            val = phi.conjugate().vec() @ W @ phi.vec()
            assert val.real >= -1e-10
            assert abs(val.imag) < 1e-10

    def test_spatial_translation_invariance_exact(self, mixed_spacetime):
        vac = stt.vacuum_state(mixed_spacetime)
        W = vac.two_point
        for dx in (1, 3, 5):
            T = solution_map(translation(mixed_spacetime, 0, dx))
            assert np.max(np.abs(T.T @ W @ T - W)) == 0.0

    def test_time_translation_invariance_off_zero_mode(self, mixed_spacetime):
        # deviation of the kernel under time translation is confined to the
        # massless zero-mode coordinates (the free particle has no invariant
        # Gaussian); everything else is exactly invariant
        from lcqft.classify import _massless_zero_mode_projector
        vac = stt.vacuum_state(mixed_spacetime)
        W = vac.two_point
        P = _massless_zero_mode_projector(mixed_spacetime)
        Q = np.eye(mixed_spacetime.data_dim) - P
        for dt_ in (1, 3):
            T = solution_map(translation(mixed_spacetime, dt_, 0))
            dev = T.T @ W @ T - W
            assert np.max(np.abs(Q @ dev @ Q)) < 1e-11
            assert np.max(np.abs(dev)) > 1e-3  # zero mode genuinely drifts

    def test_evolution_invariance_massive(self, massive_spacetime):
        # frequencies from the exact one-step diagonalization: invariance at
        # machine precision
        vac = stt.vacuum_state(massive_spacetime)
        U = dyn.one_step_matrix(massive_spacetime)
        W = vac.two_point
        assert np.max(np.abs(U.T @ W @ U - W)) < 1e-13

    def test_massless_flagged(self, mixed_spacetime, massive_spacetime):
        assert "massless-reference" in stt.vacuum_state(mixed_spacetime).flags
        assert stt.vacuum_state(massive_spacetime).flags == ()

    def test_kernel_export(self, massive_spacetime):
        data = stt.vacuum_state(massive_spacetime).kernel_to_json()
        dim = massive_spacetime.data_dim
        assert np.array(data["re"]).shape == (dim, dim)

    def test_unstable_mode_rejected(self):
        from lcqft.spacetime import LatticeSpacetime, MassSpectrum
        from lcqft.errors import LcqftError
        st_ = LatticeSpacetime(8, 8, 0.9, MassSpectrum.parse("4.5:1"))
        with pytest.raises(LcqftError):
            stt.vacuum_state(st_)


class TestEvaluate:
    def test_normalization(self, mixed_spacetime):
        vac = stt.vacuum_state(mixed_spacetime)
        assert vac.evaluate(alg.one(mixed_spacetime)) == 1.0

    def test_ccr_through_state(self, mixed_spacetime, rng):
        vac = stt.vacuum_state(mixed_spacetime)
        for _ in range(20):
            a = dyn.random_solution(rng, mixed_spacetime)
            b = dyn.random_solution(rng, mixed_spacetime)
            diff = vac.evaluate(alg.field(a) * alg.field(b)) \
                - vac.evaluate(alg.field(b) * alg.field(a))
            assert abs(diff - 1j * dyn.symplectic_form(a, b)) < 1e-11 * max(
                1.0, a.norm() * b.norm())

    def test_one_point_vanishes(self, mixed_spacetime, rng):
        vac = stt.vacuum_state(mixed_spacetime)
        phi = dyn.random_solution(rng, mixed_spacetime)
        assert abs(vac.evaluate(alg.field(phi))) == 0.0

    def test_odd_monomials_vanish(self, massive_spacetime, rng):
        vac = stt.vacuum_state(massive_spacetime)
        idx = tuple(sorted(rng.integers(0, massive_spacetime.data_dim, 3)))
        assert vac.evaluate(alg.monomial(massive_spacetime, idx)) == 0.0

    def test_quartic_power_rule(self, massive_spacetime, rng):
        # omega(Phi(phi)^4) = 3 W(phi, phi)^2 for real phi (3 pairings)
        vac = stt.vacuum_state(massive_spacetime)
        phi = dyn.random_solution(rng, massive_spacetime, complex_data=False)
        f = alg.field(phi)
        quartic = f * f * f * f
        W = phi.vec() @ vac.two_point @ phi.vec()
        val = vac.evaluate(quartic)
        assert abs(val - 3 * W ** 2) < 1e-10 * max(1.0, abs(W) ** 2)

    def test_agrees_with_reduction_oracle(self, mixed_spacetime, rng):
        # hafnian evaluation vs commutator-reduction to ordered products
        vac = stt.vacuum_state(mixed_spacetime)
        W = vac.two_point
        for _ in range(20):
            a = alg.random_element(rng, mixed_spacetime, 4, 5)
            lhs = vac.evaluate(a)
            rhs = reduction_evaluate(a, W)
            assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(rhs))

    def test_degree_cap(self, massive_spacetime):
        vac = stt.vacuum_state(massive_spacetime)
        big = alg.monomial(massive_spacetime, tuple([0] * 9))
        with pytest.raises(DegreeCapExceeded):
            vac.evaluate(big)

    def test_positivity(self, mixed_spacetime, rng):
        vac = stt.vacuum_state(mixed_spacetime)
        for _ in range(500):
            a = alg.random_element(rng, mixed_spacetime, 2, 3)
            val = vac.evaluate(a.star() * a)
            assert val.real >= -1e-9
            assert abs(val.imag) < 1e-9


class TestPullBack:
    def test_identity(self, mixed_spacetime, rng):
        vac = stt.vacuum_state(mixed_spacetime)
        g = gg.identity_gauge(mixed_spacetime.spectrum)
        pulled = stt.pull_back(vac, gg.QuantumAction(g, mixed_spacetime))
        for _ in range(20):
            a = alg.random_element(rng, mixed_spacetime, 3, 5)
            assert abs(pulled.evaluate(a) - vac.evaluate(a)) < 1e-12

    def test_translation_invariance_preserved(self, mixed_spacetime,
                                              massive_spacetime, rng):
        # pulling back a translation-invariant state by a gauge action keeps
        # translation invariance (invariant-state lemma, with the spacetime
        # symmetry realized by lattice translations): spatial translations on
        # the mixed spectrum, full spacetime translations on the massive one
        cases = [(mixed_spacetime, [(0, 2), (0, 5)]),
                 (massive_spacetime, [(0, 2), (1, 3), (2, 0)])]
        for st_, shifts in cases:
            vac = stt.vacuum_state(st_)
            g = gg.random_gauge(rng, st_.spectrum, with_ell=False)
            pulled = stt.pull_back(vac, gg.QuantumAction(g, st_))
            for (dt_, dx) in shifts:
                T = alg.lift(st_, solution_map(translation(st_, dt_, dx)))
                for _ in range(10):
                    a = alg.random_element(rng, st_, 2, 4)
                    assert abs(pulled.evaluate(T(a))
                               - pulled.evaluate(a)) < 1e-10

    def test_vacuum_invariant_under_rotations(self, mixed_spacetime, rng):
        vac = stt.vacuum_state(mixed_spacetime)
        worst = 0.0
        for _ in range(200):
            g = gg.random_gauge(rng, mixed_spacetime.spectrum, with_ell=False)
            pulled = stt.pull_back(vac, gg.QuantumAction(g, mixed_spacetime))
            a = alg.random_element(rng, mixed_spacetime, 3, 3)
            worst = max(worst, abs(pulled.evaluate(a) - vac.evaluate(a)))
        assert worst < 1e-10

    def test_one_point_after_shift(self, mixed_spacetime, rng):
        # the shifted state's one-point function is the shift functional
        vac = stt.vacuum_state(mixed_spacetime)
        spectrum = mixed_spacetime.spectrum
        for _ in range(50):
            ell = rng.standard_normal(spectrum.massless_count)
            g = gg.GaugeElement(spectrum,
                                tuple(np.eye(k) for _, k in spectrum.entries),
                                ell)
            pulled = stt.pull_back(vac, gg.QuantumAction(g, mixed_spacetime))
            phi = dyn.random_solution(rng, mixed_spacetime)
            assert abs(pulled.evaluate(alg.field(phi))
                       - gg.ell_functional(ell, phi)) < 1e-10

    def test_positivity_preserved(self, mixed_spacetime, rng):
        vac = stt.vacuum_state(mixed_spacetime)
        g = gg.random_gauge(rng, mixed_spacetime.spectrum)
        pulled = stt.pull_back(vac, gg.QuantumAction(g, mixed_spacetime))
        assert abs(pulled.evaluate(alg.one(mixed_spacetime)) - 1) < 1e-12
        for _ in range(50):
            a = alg.random_element(rng, mixed_spacetime, 2, 3)
            assert pulled.evaluate(a.star() * a).real >= -1e-9
