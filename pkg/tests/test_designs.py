import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdajscc.core import OBSERVATIONS, SchemeParams, build_joint_model
from hdajscc.designs import (
    combined_design,
    default_design,
    gen_hda_design,
    hda_costa_design,
    hda_wz_design,
    matched_optimum,
    modified_exponent_design,
    superimposed_wz_design,
    superposition_costa_design,
)
from hdajscc.errors import InfeasibleDesignError, InvalidParameterError
from hdajscc.montecarlo import McConfig, mc_validate


@pytest.mark.parametrize("args, expected", [
    ((1.0, 0.1, 1.0), 0.0909091),
    ((0.0, 1.0, 2.0), 2.0),
    ((1.0, 1.0, 2.0), 1.0),
])
def test_matched_optimum(args, expected):
    assert matched_optimum(*args) == pytest.approx(expected, abs=1e-7)


def test_matched_optimum_rejects_zero_noise():
    with pytest.raises(InvalidParameterError):
        matched_optimum(1.0, 0.0, 1.0)


# ---------------------------------------------------------------- HDA Costa


def test_hda_costa_example_and_mutual_information():
    p = SchemeParams(1.0, 1.0, interference_Q=3.0)
    d = hda_costa_design(p)
    assert d.alpha == pytest.approx(0.5)
    assert d.kappa == pytest.approx(0.7071068, abs=1e-7)
    assert d.rate_lower == pytest.approx(0.5849625, abs=1e-7)
    # Oracle: log-det mutual information of the covariance model.
    model = build_joint_model("hda-costa", p, d)
    assert model.mutual_information(["U"], ["S", "V"]) == pytest.approx(0.5849625, abs=1e-7)


def test_hda_costa_window_degenerate_at_zero_epsilon():
    d = hda_costa_design(SchemeParams(1.0, 1.0))
    assert d.rate_lower == d.rate_upper


def test_hda_costa_estimator_reaches_matched_optimum():
    p = SchemeParams(1.0, 0.1, interference_Q=1.0)
    d = hda_costa_design(p)
    assert d.alpha == pytest.approx(0.9090909, abs=1e-7)
    assert d.kappa**2 == pytest.approx(0.9090909, abs=1e-7)
    stats = mc_validate(McConfig("hda-costa", p, d, trials=400_000, seed=5))
    assert abs(stats.empirical_d - 0.0909091) < 4 * stats.stderr


def test_hda_costa_epsilon_limits():
    with pytest.raises(InfeasibleDesignError):
        hda_costa_design(SchemeParams(1.0, 0.1, epsilon=1.0))
    # kappa^2 = 1/1.1 - eps < 0 while eps < P.
    with pytest.raises(InfeasibleDesignError):
        hda_costa_design(SchemeParams(1.0, 0.1, epsilon=0.95))


@settings(max_examples=80, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.01, 5), st.floats(0, 5), st.floats(0.1, 3),
       st.one_of(st.just(0.0), st.floats(1e-6, 0.99)))
def test_rate_window_ordering(P, s2, Q, sv2, eps_frac):
    eps = eps_frac * P * P / (P + s2)  # keeps kappa^2 >= 0
    p = SchemeParams(P, s2, interference_Q=Q, source_var=sv2, innovation_var=sv2 / 2, epsilon=eps)
    for d in (hda_costa_design(p), combined_design(p), hda_wz_design(p)):
        assert 0 < d.alpha < 1 and d.kappa >= 0
        if eps == 0:
            assert d.rate_lower == pytest.approx(d.rate_upper, abs=1e-12)
        else:
            assert d.rate_lower < d.rate_upper


# ---------------------------------------------------------------- generalized HDA


def test_gen_hda_endpoints():
    p = SchemeParams(1.0, 0.1, interference_Q=1.0)
    assert gen_hda_design(p, 0.0).kappa1 ** 2 == pytest.approx(hda_costa_design(p).kappa ** 2, rel=1e-12)
    top = gen_hda_design(p, p.capacity_bits)
    assert top.kappa1 == 0.0
    assert top.rate_margin == pytest.approx(0.0, abs=1e-12)


def test_gen_hda_rate_margin_matches_mutual_information():
    p = SchemeParams(1.0, 0.1, interference_Q=1.0)
    R = 0.5 * p.capacity_bits
    d = gen_hda_design(p, R)
    assert d.rate_margin >= 0
    # Oracle: margin = I(U;Y) - I(U;S,E) - R from the covariance model.
    m = build_joint_model("gen-hda", p, d)
    margin = m.mutual_information(["U"], ["Y"]) - m.mutual_information(["U"], ["S", "E"]) - R
    assert d.rate_margin == pytest.approx(margin, abs=1e-10)


def test_gen_hda_rejects_rate_above_capacity():
    p = SchemeParams(1.0, 0.1)
    with pytest.raises(InfeasibleDesignError):
        gen_hda_design(p, 1.01 * p.capacity_bits)
    with pytest.raises(InvalidParameterError):
        gen_hda_design(p, -0.1)


# ---------------------------------------------------------------- superposition Costa


def test_superposition_costa_endpoints():
    p = SchemeParams(1.0, 0.1, interference_Q=1.0)
    d0 = superposition_costa_design(p, 0.0)
    assert d0.power_c == pytest.approx(0.0, abs=1e-15) and d0.power_hc == pytest.approx(1.0)
    near = superposition_costa_design(p, p.capacity_bits * (1 - 1e-6))
    assert near.power_hc < 1e-5
    with pytest.raises(InfeasibleDesignError):
        superposition_costa_design(p, p.capacity_bits)


def test_superposition_costa_split_and_composed_distortion():
    p = SchemeParams(1.0, 0.1, interference_Q=1.0)
    d = superposition_costa_design(p, 0.5)
    assert d.power_c == pytest.approx(0.55, abs=1e-12)
    assert d.power_hc == pytest.approx(0.45, abs=1e-12)
    assert d.alpha_c == pytest.approx(0.55 / 1.1)
    assert d.alpha_hc == pytest.approx(0.45 / 0.55)
    # Oracle: LMMSE over the layered covariance model reproduces the matched optimum.
    m = build_joint_model("superposition-costa", p, d)
    assert m.mmse("V", OBSERVATIONS["superposition-costa"]).mmse == pytest.approx(1 / 11, abs=1e-12)
    assert d.distortion == pytest.approx(1 / 11, abs=1e-12)


# ---------------------------------------------------------------- Wyner-Ziv


def test_hda_wz_without_side_information_is_hda_costa():
    p = SchemeParams(1.0, 0.1)
    wz, costa = hda_wz_design(p), hda_costa_design(p)
    assert wz.kappa == pytest.approx(costa.kappa)
    assert wz.alpha == pytest.approx(costa.alpha)
    assert wz.rate_lower == pytest.approx(costa.rate_lower)
    assert wz.rate_upper == pytest.approx(costa.rate_upper)


def test_hda_wz_example():
    p = SchemeParams(1.0, 0.1, innovation_var=0.5)
    d = hda_wz_design(p)
    assert d.kappa**2 == pytest.approx(1.8181818, abs=1e-7)
    stats = mc_validate(McConfig("hda-wz", p, d, trials=400_000, seed=9))
    assert abs(stats.empirical_d - 0.0454545) < 4 * stats.stderr


def test_hda_wz_epsilon_equal_power_fails():
    with pytest.raises(InfeasibleDesignError):
        hda_wz_design(SchemeParams(1.0, 0.1, innovation_var=0.5, epsilon=1.0))


def test_superimposed_wz_endpoints_and_distortion():
    p = SchemeParams(1.0, 0.1, innovation_var=0.5)
    assert superimposed_wz_design(p, 0.0).power_hwz == pytest.approx(1.0)
    assert superimposed_wz_design(p, p.capacity_bits * (1 - 1e-6)).power_hwz < 1e-5
    d = superimposed_wz_design(p, 0.25)
    # Oracle: chain of the layer formulas evaluated by hand.
    se2 = 0.5 * 2 ** -0.5
    p_hwz = 1.1 * 2 ** -0.5 - 0.1
    assert d.distortion == pytest.approx(se2 * 0.1 / (p_hwz + 0.1), abs=1e-12)
    assert d.distortion == pytest.approx(0.0454545, abs=1e-7)
    m = build_joint_model("superimposed-wz", p, d)
    assert m.mmse("V", OBSERVATIONS["superimposed-wz"]).mmse == pytest.approx(0.0454545, abs=1e-7)


# ---------------------------------------------------------------- combined


def test_combined_reductions():
    p = SchemeParams(1.0, 0.1, interference_Q=1.0)
    assert combined_design(p) == hda_costa_design(p)
    p0 = SchemeParams(1.0, 0.1, innovation_var=0.5)
    c, wz = combined_design(p0), hda_wz_design(p0)
    assert c.kappa == pytest.approx(wz.kappa)
    assert c.estimator_gain == pytest.approx(wz.estimator_offset_gain)
    assert c.rate_upper == pytest.approx(wz.rate_upper)


def test_combined_matched_monte_carlo():
    p = SchemeParams(1.0, 0.1, interference_Q=1.0)
    stats = mc_validate(McConfig("combined", p, combined_design(p), trials=400_000, seed=13))
    assert abs(stats.empirical_d - 0.0909091) < 4 * stats.stderr


# ---------------------------------------------------------------- modified scheme


def test_modified_design_example():
    d = modified_exponent_design(1.0, 1.0, 0.1, 1.0)
    assert d.feasible
    assert d.kappa_e_sq == pytest.approx(1.9 / 2.1, abs=1e-12)
    # Oracle: just below the bound the codeword is decodable, just above it is not.
    for scale, decodable in ((0.999, True), (1.001, False)):
        fake = type("D", (), {"kappa_e": math.sqrt(scale * d.kappa_e_sq)})
        p = SchemeParams(1.0, 0.1, interference_Q=1.0, source_var=2.0, innovation_var=1.0)
        m = build_joint_model("modified", p, fake)
        gap = m.mutual_information(["U"], ["Y", "V'"]) - m.mutual_information(["U"], ["S", "V"])
        assert (gap > 0) == decodable


def test_modified_design_reductions():
    d = modified_exponent_design(1.0, 0.0, 0.1, 0.5)
    assert d.kappa_e_sq == pytest.approx(1.0 / (1.1 * 0.5))
    bad = modified_exponent_design(0.1, 10.0, 1.0, 1.0)
    assert not bad.feasible and bad.kappa_e is None
    with pytest.raises(InfeasibleDesignError):
        default_design("modified", SchemeParams(0.1, 1.0, interference_Q=10.0))


def test_default_design_dispatch():
    p = SchemeParams(1.0, 0.1, interference_Q=1.0)
    assert default_design("naive", p) is None
    with pytest.raises(InvalidParameterError):
        default_design("gen-hda", p)
    with pytest.raises(InvalidParameterError):
        default_design("nope", p, 0.1)
    assert default_design("gen-hda", p, 0.2).digital_rate == 0.2
