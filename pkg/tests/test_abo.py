import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emkit.abo import (
    AboModel,
    AlleleFrequencies,
    BloodTypeCounts,
    ExpectedGenotypeCounts,
    UNIFORM_START,
    abo_e_step,
    abo_log_likelihood,
    abo_m_step,
    absorbed_alleles,
)
from emkit.core import run_em
from emkit.errors import ConstraintViolation, DegenerateInput, ImpossibleData

from helpers import abo_grid_mle

COUNTS = BloodTypeCounts(186, 38, 36, 284)


def test_e_step_equal_frequencies_split():
    g = abo_e_step(UNIFORM_START, BloodTypeCounts(300, 0, 0, 0))
    assert g.g_AA == pytest.approx(100)
    assert g.g_AO == pytest.approx(200)


def test_e_step_without_o_allele():
    g = abo_e_step(AlleleFrequencies(1.0, 0.0, 0.0), BloodTypeCounts(10, 0, 0, 0))
    assert (g.g_AA, g.g_AO) == (10.0, 0.0)


def test_e_step_hand_evaluated():
    g = abo_e_step(AlleleFrequencies(0.3, 0.1, 0.6), COUNTS)
    # p_A^2 / (p_A^2 + 2 p_A p_O) = 0.09 / 0.45; p_B^2 / (...) = 0.01 / 0.13
    assert g.g_AA == pytest.approx(37.2, abs=1e-12)
    assert g.g_AO == pytest.approx(148.8, abs=1e-12)
    assert g.g_BB == pytest.approx(38 / 13, abs=1e-12)
    assert g.g_BO == pytest.approx(38 * 12 / 13, abs=1e-12)
    assert (g.g_AB, g.g_OO) == (36, 284)
    assert g.g_AA + g.g_AO == pytest.approx(186, abs=1e-9)


def test_e_step_impossible_phenotype():
    with pytest.raises(ImpossibleData):
        abo_e_step(AlleleFrequencies(0.0, 0.5, 0.5), BloodTypeCounts(3, 1, 0, 1))


def test_e_step_zero_count_ignores_denominator():
    g = abo_e_step(AlleleFrequencies(0.0, 0.5, 0.5), BloodTypeCounts(0, 4, 0, 1))
    assert (g.g_AA, g.g_AO) == (0.0, 0.0)


def test_m_step_all_ab():
    p = abo_m_step(ExpectedGenotypeCounts(0, 0, 0, 0, 7, 0), 7)
    assert p.as_tuple() == (0.5, 0.5, 0.0)


def test_m_step_all_o():
    p = abo_m_step(ExpectedGenotypeCounts(0, 0, 0, 0, 0, 12), 12)
    assert p.as_tuple() == (0.0, 0.0, 1.0)


def test_m_step_rejects_zero_n():
    with pytest.raises(DegenerateInput):
        abo_m_step(ExpectedGenotypeCounts(0, 0, 0, 0, 0, 0), 0)


def test_one_iteration_matches_exact_arithmetic():
    third = Fraction(1, 3)
    g_AA, g_AO = 186 * third, 186 * 2 * third
    g_BB, g_BO = 38 * third, 38 * 2 * third
    two_n = 2 * 544
    expected = (
        (2 * g_AA + g_AO + 36) / two_n,
        (2 * g_BB + g_BO + 36) / two_n,
        (2 * 284 + g_AO + g_BO) / two_n,
    )
    p = abo_m_step(abo_e_step(UNIFORM_START, COUNTS), COUNTS.n)
    assert p.as_tuple() == pytest.approx([float(x) for x in expected], abs=1e-15)


def test_log_likelihood_examples():
    assert abo_log_likelihood(AlleleFrequencies(0, 0, 1), BloodTypeCounts(0, 0, 0, 100)) == 0.0
    assert abo_log_likelihood(AlleleFrequencies(0.5, 0.5, 0), BloodTypeCounts(0, 0, 10, 0)) == pytest.approx(
        10 * math.log(0.5)
    )
    assert abo_log_likelihood(AlleleFrequencies(0, 0.5, 0.5), BloodTypeCounts(1, 0, 0, 0)) == -math.inf


def test_maximum_matches_grid_oracle():
    result = run_em(AboModel(), COUNTS, UNIFORM_START)
    p_grid, ll_grid = abo_grid_mle(COUNTS.as_tuple())
    assert np.array(result.final_params.as_tuple()) == pytest.approx(p_grid, abs=1e-4)
    assert abo_log_likelihood(result.final_params, COUNTS) == pytest.approx(ll_grid, abs=1e-6)


def test_mle_is_fixed_point():
    p_grid, _ = abo_grid_mle(COUNTS.as_tuple())
    p = AlleleFrequencies(*p_grid)
    nxt = abo_m_step(abo_e_step(p, COUNTS), COUNTS.n)
    assert np.abs(np.array(nxt.as_tuple()) - p_grid).max() < 1e-6


def test_counts_validation():
    with pytest.raises(DegenerateInput):
        BloodTypeCounts(0, 0, 0, 0)
    with pytest.raises(ConstraintViolation):
        BloodTypeCounts(-1, 2, 0, 0)


def test_absorbed_alleles_flagged():
    counts = BloodTypeCounts(0, 5, 0, 5)
    result = run_em(AboModel(), counts, UNIFORM_START)
    assert result.final_params.p_A < 1e-6
    assert absorbed_alleles(AlleleFrequencies(0.0, 0.4, 0.6), counts) == ["A"]


count = st.integers(min_value=0, max_value=500)


@settings(max_examples=200, deadline=None)
@given(count, count, count, count, st.tuples(*(st.floats(0.01, 1.0),) * 3))
def test_e_step_conserves_phenotypes_and_m_step_stays_on_simplex(t_A, t_B, t_AB, t_O, raw):
    if t_A + t_B + t_AB + t_O == 0:
        t_O = 1
    counts = BloodTypeCounts(t_A, t_B, t_AB, t_O)
    total = sum(raw)
    freqs = AlleleFrequencies(*(r / total for r in raw))
    g = abo_e_step(freqs, counts)
    assert abs(g.g_AA + g.g_AO - t_A) <= 1e-9
    assert abs(g.g_BB + g.g_BO - t_B) <= 1e-9
    assert g.g_AB == t_AB and g.g_OO == t_O
    p = abo_m_step(g, counts.n)
    assert min(p.as_tuple()) >= 0
    assert abs(sum(p.as_tuple()) - 1) <= 1e-12
