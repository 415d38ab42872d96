import math

import numpy as np
import pytest

from cvsuperpose.epr import (
    SEPARABLE_BOUND,
    PnesSpec,
    closed_form_terms,
    epr_closed_form,
    epr_frame_value,
    epr_operator_matrix,
    epr_pure_form,
    epr_value,
    pnes_brute_force,
    pnes_epr_value,
    pnes_optimize,
    pnes_state,
    pnes_support,
    quadrature_moments,
    subspace_epr_optimum,
)
from cvsuperpose.errors import StateError, ZeroStateError
from cvsuperpose.fock_core import (
    ADDITION,
    SUBTRACTION,
    SuperpositionOp,
    TwoModeState,
    build_reference_state,
    frame_reference_state,
    make_tmss,
    vacuum,
)


class TestMomentRoute:
    def test_vacuum(self):
        assert epr_value(vacuum()) == pytest.approx(2.0)

    @pytest.mark.parametrize("s", [0.0, 0.3, 0.5, 1.0])
    def test_tmss(self, policy, s):
        assert epr_value(make_tmss(s, policy)) == pytest.approx(2 * math.exp(-2 * s), abs=1e-10)

    def test_single_subtraction(self, policy):
        for s in (0.2, 0.6):
            state = build_reference_state("sub_A", s, policy=policy)
            assert epr_value(state) == pytest.approx(4 * math.exp(-2 * s), abs=1e-10)

    def test_displaced_means_are_removed(self):
        # (|0> + |1>)/sqrt2 on mode A, vacuum on B: a coherent-like product state
        coeffs = np.array([[1.0], [1.0]]) / math.sqrt(2)
        m = quadrature_moments(TwoModeState(coeffs))
        assert m.mean_a == pytest.approx(0.5)
        assert epr_value(TwoModeState(coeffs)) >= SEPARABLE_BOUND - 1e-12

    def test_unnormalized_rejected(self):
        with pytest.raises(StateError):
            quadrature_moments(TwoModeState(np.ones((2, 2))))


class TestClosedForm:
    def test_terms_for_symmetric_subtraction(self):
        s = 0.5
        terms = closed_form_terms(s, SUBTRACTION, SUBTRACTION)
        assert terms.A == pytest.approx(math.sinh(s) ** 2)
        assert terms.C == 0.0 and terms.D == 0.0

    @pytest.mark.parametrize("s", [0.05, 0.4, 1.0])
    @pytest.mark.parametrize("r", [0.0, 0.25, 0.6, 1.0])
    def test_routes_agree(self, policy, s, r):
        op = SuperpositionOp.from_r(r)
        closed = epr_closed_form(s, op, op)
        assert epr_pure_form(s, op, op) == pytest.approx(closed, abs=1e-12)
        assert epr_value(build_reference_state("coherent_AB", s, op, policy)) == pytest.approx(closed, abs=1e-9)
        assert epr_frame_value(frame_reference_state("coherent_AB", s, op), s) == pytest.approx(closed, abs=1e-12)

    def test_asymmetric_amplitudes(self, policy):
        s, op_a, op_b = 0.35, SuperpositionOp.from_r(0.2), SuperpositionOp.from_r(0.8)
        state = build_reference_state("coherent_AB", s, op_a, policy, op_b=op_b)
        assert epr_value(state) == pytest.approx(epr_closed_form(s, op_a, op_b), abs=1e-9)

    def test_addition_at_zero_squeezing(self):
        # a^dag b^dag |00> = |11>
        assert epr_closed_form(0.0, ADDITION, ADDITION) == pytest.approx(6.0)

    def test_zero_state(self):
        with pytest.raises(ZeroStateError):
            epr_closed_form(0.0, SUBTRACTION, SUBTRACTION)

    def test_coherent_beats_separable_bound_at_weak_squeezing(self):
        values = [epr_closed_form(0.06, SuperpositionOp.from_r(r), SuperpositionOp.from_r(r))
                  for r in np.linspace(0.0, 1.0, 201)]
        assert min(values) == pytest.approx(1.30, abs=0.02)


class TestPnes:
    def test_support(self):
        assert pnes_support("ladder", 2) == [(0, 1), (1, 2), (2, 3)]
        with pytest.raises(ValueError):
            pnes_support("ring", 2)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            PnesSpec("diagonal", (0.0, 0.0))
        with pytest.raises(ValueError):
            PnesSpec("diagonal", ())

    @pytest.mark.parametrize("kind, coeffs", [("diagonal", (1.0, 0.4, -0.2)), ("ladder", (1.0, 0.3, 0.1))])
    def test_formula_matches_moments(self, kind, coeffs):
        spec = PnesSpec(kind, coeffs)
        assert pnes_epr_value(spec) == pytest.approx(epr_value(pnes_state(spec)), abs=1e-12)

    def test_operator_matrix_is_symmetric(self):
        K = epr_operator_matrix(pnes_support("diagonal", 4))
        np.testing.assert_allclose(K, K.T)

    def test_subspace_rejects_single_photon_neighbours(self):
        with pytest.raises(ValueError):
            subspace_epr_optimum([(0, 0), (1, 0)])

    def test_diagonal_zero_is_vacuum(self):
        spec, value = pnes_optimize("diagonal", 0)
        assert value == SEPARABLE_BOUND
        assert spec.coeffs == (1.0,)

    def test_diagonal_one(self):
        _, value = pnes_optimize("diagonal", 1)
        assert value == pytest.approx(4 - 2 * math.sqrt(2), abs=1e-12)

    def test_diagonal_two(self):
        spec, value = pnes_optimize("diagonal", 2)
        assert value == pytest.approx(0.8316, abs=1e-4)
        np.testing.assert_allclose(spec.ratios(), (1.0, 0.5842, 0.2549), atol=1e-4)

    def test_diagonal_decreases_with_N(self):
        values = [pnes_optimize("diagonal", N)[1] for N in range(6)]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_ladder_start(self):
        assert pnes_optimize("ladder", 0)[1] == pytest.approx(4.0)
        assert pnes_optimize("ladder", 1)[1] == pytest.approx(2.536, abs=1e-3)

    def test_ladder_reaches_eigen_bound(self):
        _, value = pnes_optimize("ladder", 3)
        bound, _ = subspace_epr_optimum(pnes_support("ladder", 3))
        assert value == pytest.approx(bound, abs=1e-6)

    def test_eigen_route_matches_tridiagonal(self):
        bound, state = subspace_epr_optimum(pnes_support("diagonal", 3))
        assert bound == pytest.approx(pnes_optimize("diagonal", 3)[1], abs=1e-12)
        assert epr_value(state) == pytest.approx(bound, abs=1e-12)

    def test_two_photon_cross_terms_do_not_help(self):
        extended, _ = subspace_epr_optimum([(0, 0), (1, 1), (2, 2), (0, 2), (2, 0)])
        assert extended == pytest.approx(pnes_optimize("diagonal", 2)[1], abs=1e-10)

    def test_coherent_operation_tends_to_first_diagonal_optimum(self):
        values = [epr_closed_form(1e-4, SuperpositionOp.from_r(r), SuperpositionOp.from_r(r))
                  for r in np.linspace(0.0, 1.0, 2001)]
        assert min(values) == pytest.approx(4 - 2 * math.sqrt(2), abs=2e-3)

    @pytest.mark.slow
    def test_brute_force_agrees(self):
        _, brute = pnes_brute_force("diagonal", 2, points=1_000_000)
        assert brute == pytest.approx(pnes_optimize("diagonal", 2)[1], abs=1e-6)

    def test_brute_force_needs_N(self):
        with pytest.raises(ValueError):
            pnes_brute_force("diagonal", 0)
