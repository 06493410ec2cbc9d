import json

import numpy as np
import pytest

from indmech import (
    CalibrationError,
    CalibrationTargets,
    ScenarioError,
    build_adherence,
    dump_scenario,
    load_scenario,
    observed_law,
    parse_scenario,
)


def law_triplet(model):
    law = observed_law(model)
    return law.columns, law.codes.tolist(), law.probs.tolist()


def test_round_trip_preserves_the_law(
    toy1, toy1v, pie, with_l, birthweight, adherence, tmp_path
):
    for i, model in enumerate((toy1, toy1v, pie, with_l, birthweight, adherence)):
        path = tmp_path / f"model{i}.json"
        path.write_text(dump_scenario(model, name=f"model{i}"))
        loaded = load_scenario(path)
        assert law_triplet(loaded) == law_triplet(model)
        assert loaded.roles == model.roles
        assert loaded.truncation == model.truncation


def test_float_weights_round_trip_exactly(adherence):
    reparsed = parse_scenario(json.loads(dump_scenario(adherence)))
    for name, spec in adherence.noise.items():
        assert reparsed.noise[name].weights == spec.weights


def test_dump_shape(toy1):
    text = dump_scenario(toy1, name="toy")
    assert text.endswith("}\n")
    data = json.loads(text)
    assert data["name"] == "toy"
    assert list(data) == ["name", "variables", "noise", "mechanisms", "roles", "truncation"]
    assert text == json.dumps(data, indent=2) + "\n"


def test_unknown_keys_rejected(toy1):
    base = json.loads(dump_scenario(toy1))

    bad = dict(base, flavor="salted")
    with pytest.raises(ScenarioError, match="unknown key 'flavor'"):
        parse_scenario(bad)

    bad = json.loads(dump_scenario(toy1))
    bad["variables"][0]["color"] = "red"
    with pytest.raises(ScenarioError, match=r"variables\[0\]: unknown key 'color'"):
        parse_scenario(bad)

    bad = json.loads(dump_scenario(toy1))
    bad["mechanisms"]["D"]["comment"] = "the event"
    with pytest.raises(ScenarioError, match="mechanisms.D: unknown key 'comment'"):
        parse_scenario(bad)

    bad = json.loads(dump_scenario(toy1))
    bad["calibration"] = {"targets": {}, "notes": "x"}
    with pytest.raises(ScenarioError, match="calibration: unknown key 'notes'"):
        parse_scenario(bad)


def test_missing_sections_rejected(toy1):
    base = json.loads(dump_scenario(toy1))
    for key in ("variables", "noise", "mechanisms", "roles", "truncation"):
        bad = {k: v for k, v in base.items() if k != key}
        with pytest.raises(ScenarioError, match=f"missing section {key!r}"):
            parse_scenario(bad)
    with pytest.raises(ScenarioError, match="neither model sections nor a calibration"):
        parse_scenario({"name": "empty"})
    with pytest.raises(ScenarioError, match="must be a JSON object"):
        parse_scenario(["not", "a", "model"])


def test_table_length_validated(toy1):
    bad = json.loads(dump_scenario(toy1))
    bad["mechanisms"]["D"]["table"] = bad["mechanisms"]["D"]["table"][:-1]
    with pytest.raises(
        ScenarioError,
        match=r"mechanisms.D.table: 7 entries, expected 8 \(row-major over the "
        r"parent supports, last parent fastest\)",
    ):
        parse_scenario(bad)


def test_table_order_is_last_parent_fastest(toy1):
    data = json.loads(dump_scenario(toy1))
    flat = data["mechanisms"]["D"]["table"]
    # Parents (D_A, U, eps_d): the flat table walks eps_d first.
    mech = toy1.mechanisms["D"]
    assert data["mechanisms"]["D"]["parents"] == ["D_A", "U", "eps_d"]
    assert flat == [
        mech.table[(da, uu, e)]
        for da in (0, 1)
        for uu in (0, 1)
        for e in (0, 1)
    ]


def test_schema_type_errors(toy1):
    bad = json.loads(dump_scenario(toy1))
    bad["truncation"] = "yes"
    with pytest.raises(ScenarioError, match="truncation: expected true or false"):
        parse_scenario(bad)

    bad = json.loads(dump_scenario(toy1))
    bad["noise"]["U"] = [0.5, "half"]
    with pytest.raises(ScenarioError, match="noise.U: expected a number"):
        parse_scenario(bad)

    bad = json.loads(dump_scenario(toy1))
    bad["variables"][0]["support"] = []
    with pytest.raises(ScenarioError, match="support must be a nonempty list"):
        parse_scenario(bad)

    bad = json.loads(dump_scenario(toy1))
    bad["mechanisms"]["D"]["table"][0] = True
    with pytest.raises(ScenarioError, match="expected an integer, got True"):
        parse_scenario(bad)

    bad = json.loads(dump_scenario(toy1))
    bad["noise"]["ghost"] = [1.0]
    with pytest.raises(ScenarioError, match="noise: unknown variable 'ghost'"):
        parse_scenario(bad)


def test_invalid_model_is_reported_as_such(toy1):
    bad = json.loads(dump_scenario(toy1))
    bad["noise"]["U"] = [0.5, 0.4]
    with pytest.raises(ScenarioError, match="does not describe a valid model"):
        parse_scenario(bad)


def test_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"variables": [')
    with pytest.raises(ScenarioError, match="not valid JSON"):
        load_scenario(path)


def test_calibration_only_scenario_solves_the_trial(adherence):
    data = {
        "calibration": {
            "targets": CalibrationTargets().as_dict(),
            "tolerance": 1e-6,
        }
    }
    solved = parse_scenario(data)
    assert law_triplet(solved) == law_triplet(adherence)


def test_calibration_block_is_checked_against_the_model(toy1, adherence):
    text = dump_scenario(adherence, calibration=CalibrationTargets())
    assert law_triplet(parse_scenario(json.loads(text))) == law_triplet(adherence)

    # An undefined-outcome model cannot meet any moment targets.
    mismatched = json.loads(dump_scenario(toy1, calibration=CalibrationTargets()))
    with pytest.raises(CalibrationError, match="misses its calibration targets"):
        parse_scenario(mismatched)

    incomplete = {"calibration": {"targets": {"survival_a1": 0.2}}}
    with pytest.raises(ScenarioError, match="missing moment"):
        parse_scenario(incomplete)


def test_calibration_residuals_reported(birthweight):
    off = json.loads(dump_scenario(birthweight, calibration=CalibrationTargets()))
    with pytest.raises(CalibrationError) as exc:
        parse_scenario(off)
    assert set(exc.value.residuals) == {
        "survival_a1",
        "survival_a0",
        "mean_y_a1",
        "mean_y_a0",
    }
    assert max(exc.value.residuals.values()) > 1e-6


def test_solved_trial_is_deterministic():
    a = build_adherence()
    b = build_adherence()
    for name in a.noise:
        assert a.noise[name].weights == b.noise[name].weights
    assert np.array_equal(observed_law(a).probs, observed_law(b).probs)
