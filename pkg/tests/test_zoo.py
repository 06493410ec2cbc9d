import numpy as np
import pytest

from indmech import (
    CalibrationError,
    CalibrationTargets,
    FIXTURE_NAMES,
    Intervention,
    PositivityError,
    build_adherence,
    build_fixture,
    build_pie,
    build_surgery,
    build_violation,
    build_with_l,
    calibration_moments,
    counterfactual_joint,
    event_probability,
    observed_law,
    random_fig4_model,
    random_fig7_model,
    shared_threshold_noise,
    validate_model,
)
from indmech.audit import audit_determinism


def test_every_fixture_is_valid_and_deterministic():
    for name in FIXTURE_NAMES:
        model = build_fixture(name)
        assert validate_model(model).ok, name
        assert audit_determinism(model).status == "pass", name


def test_fixture_lookup_is_case_insensitive():
    assert build_fixture("TOY1").roles == build_fixture("toy1").roles


def test_unknown_fixture_name():
    with pytest.raises(ValueError, match="unknown fixture"):
        build_fixture("toy99")


def test_surgery_threshold_validation():
    with pytest.raises(ValueError, match="exceeds the noise range"):
        build_surgery(y_base=5, y_treat=4, y_frail=2)
    with pytest.raises(ValueError, match="nonnegative integer"):
        build_surgery(y_base=-1)


def test_violation_with_equal_thresholds_recovers_clean_law(toy1):
    collapsed = build_violation(side_threshold_u0=1, side_threshold_u1=1)
    a = observed_law(toy1)
    b = observed_law(collapsed)
    assert a.columns == b.columns
    assert np.array_equal(a.codes, b.codes)
    assert np.allclose(a.probs, b.probs, atol=1e-15)


def test_pie_precursor_rates(pie):
    a = pie.roles["A"]
    d_a = pie.roles["D_A"]
    wt = counterfactual_joint(pie, [Intervention({a: 1}), Intervention({a: 0})])
    assert event_probability(wt, {(d_a, 0): 1}) == pytest.approx(0.28, abs=1e-12)
    assert event_probability(wt, {(d_a, 1): 1}) == pytest.approx(0.37, abs=1e-12)


def test_with_l_guards_covariate_positivity():
    # L copies the treatment component exactly, so each event-free covariate
    # stratum exists in only one arm; the guard reports the first.
    with pytest.raises(PositivityError, match=r"\(A8\) stratum \{D=0, L=0, A=1\}"):
        build_with_l(l_base=0, l_treat=10, da_base=0, da_l=0)


def test_shared_threshold_noise_matches_cell_probabilities():
    cells = {(0,): 0.2, (1,): 0.5, (2,): 0.2}
    var, spec, ranks = shared_threshold_noise("eps", cells)
    assert abs(sum(spec.weights) - 1.0) < 1e-12
    for cell, p in cells.items():
        # P(code < rank) must reproduce the requested cell probability.
        fired = sum(
            w for code, w in zip(var.support, spec.weights) if code < ranks[cell]
        )
        assert fired == pytest.approx(p, abs=1e-12)


def test_shared_threshold_noise_is_a_monotone_coupling():
    cells = {(0,): 0.15, (1,): 0.6}
    var, spec, ranks = shared_threshold_noise("eps", cells)
    # The lower-probability cell fires on a subset of the higher one's codes.
    assert ranks[(0,)] <= ranks[(1,)]


def test_adherence_hits_published_moments(adherence):
    targets = CalibrationTargets().as_dict()
    moments = calibration_moments(adherence)
    for key, want in targets.items():
        assert moments[key] == pytest.approx(want, abs=1e-6)


def test_adherence_rejects_unreachable_targets():
    bad = CalibrationTargets(survival_a1=0.5, survival_a0=0.399)
    with pytest.raises(CalibrationError, match="survival_a1"):
        build_adherence(bad)


def test_random_fig4_models_are_valid(fig4_suite):
    for model in fig4_suite:
        law = observed_law(model)
        for a in (0, 1):
            assert event_probability(law, {"A": a, "D": 0}) >= 0.01


def test_random_fig4_models_vary(fig4_suite):
    laws = {tuple(observed_law(m).probs.tolist()) for m in fig4_suite[:20]}
    assert len(laws) > 15


def test_random_fig7_models_have_covariate_strata(fig7_suite):
    for model in fig7_suite:
        law = observed_law(model)
        assert "L" in law.columns
        for a in (0, 1):
            for lv in (0, 1):
                assert (
                    event_probability(law, {"A": a, "D": 0, "L": lv}) >= 0.005
                )


def test_random_generation_is_seed_deterministic():
    a = random_fig4_model(np.random.default_rng(123))
    b = random_fig4_model(np.random.default_rng(123))
    la, lb = observed_law(a), observed_law(b)
    assert np.array_equal(la.codes, lb.codes)
    assert np.array_equal(la.probs, lb.probs)
