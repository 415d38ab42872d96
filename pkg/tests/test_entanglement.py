import math

import numpy as np
import pytest

from cvsuperpose.entanglement import (
    SchmidtSpectrum,
    entanglement_entropy,
    entropy_of_entanglement,
    schmidt_decompose,
    schmidt_table,
    tmss_entropy_closed_form,
)
from cvsuperpose.errors import StateError
from cvsuperpose.fock_core import SuperpositionOp, TwoModeState, build_reference_state, make_tmss


def test_product_state_has_zero_entropy():
    assert entanglement_entropy(TwoModeState(np.ones((1, 1)), normalized=True)) == 0.0


def test_bell_pair_is_one_bit():
    coeffs = np.eye(2) / math.sqrt(2)
    assert entanglement_entropy(TwoModeState(coeffs)) == pytest.approx(1.0, abs=1e-12)


def test_unnormalized_state_rejected():
    with pytest.raises(StateError):
        schmidt_decompose(TwoModeState(np.eye(2)))


def test_spectrum_must_be_descending():
    with pytest.raises(ValueError):
        SchmidtSpectrum(np.array([0.3, 0.9]))


def test_spectrum_rank_ignores_floor():
    spectrum = SchmidtSpectrum(np.array([1.0, 1e-15]))
    assert spectrum.rank == 1
    assert entropy_of_entanglement(spectrum) == 0.0


@pytest.mark.parametrize("s", [0.1, 0.5, 1.0])
def test_tmss_matches_closed_form(policy, s):
    assert entanglement_entropy(make_tmss(s, policy)) == pytest.approx(tmss_entropy_closed_form(s), abs=1e-10)


def test_tmss_closed_form_at_zero():
    assert tmss_entropy_closed_form(0.0) == 0.0


def test_schmidt_values_are_squeeze_ratios(policy):
    lam = math.tanh(0.4)
    values = schmidt_decompose(make_tmss(0.4, policy)).values
    np.testing.assert_allclose(values[1:6] / values[:5], lam, rtol=1e-10)


@pytest.mark.parametrize("name, r", [("addsub_addsub_AB", None), ("coherent_A", 0.5), ("coherent_AB", 0.5)])
def test_weak_squeezing_table(policy, name, r):
    s = math.atanh(1e-3)
    op = SuperpositionOp.from_r(r) if r is not None else None
    values = schmidt_decompose(build_reference_state(name, s, op, policy)).values
    expected = sorted(schmidt_table(name, s, r), reverse=True)
    assert values[0] == pytest.approx(expected[0], rel=1e-4)
    assert values[1] == pytest.approx(expected[1], rel=1e-4)


def test_schmidt_table_needs_r():
    with pytest.raises(ValueError):
        schmidt_table("coherent_AB", 0.1)


def test_coherent_beats_subtraction_at_weak_squeezing(policy):
    s = 0.1
    op = SuperpositionOp.from_r(0.7)
    coherent = entanglement_entropy(build_reference_state("coherent_AB", s, op, policy))
    subtracted = entanglement_entropy(build_reference_state("sub_AB", s, policy=policy))
    assert coherent > subtracted


def test_entropy_invariant_under_basis_relabelling(random_state, rng):
    state = random_state((5, 7))
    rows = rng.permutation(5)
    cols = rng.permutation(7)
    relabelled = TwoModeState(state.coeffs[rows][:, cols], normalized=True)
    assert entanglement_entropy(relabelled) == pytest.approx(entanglement_entropy(state), abs=1e-12)
    swapped = TwoModeState(state.coeffs.T, normalized=True)
    assert entanglement_entropy(swapped) == pytest.approx(entanglement_entropy(state), abs=1e-12)
