import numpy as np
import pytest
from scipy import stats

import oracle
from indmech import (
    ScenarioError,
    UNDEFINED,
    dataset_from_csv,
    dataset_to_csv,
    sample_dataset,
)


def test_same_seed_same_rows(toy1):
    a = sample_dataset(toy1, 500, seed=42)
    b = sample_dataset(toy1, 500, seed=42)
    assert np.array_equal(a.codes, b.codes)


def test_different_seeds_differ(toy1):
    a = sample_dataset(toy1, 500, seed=42)
    b = sample_dataset(toy1, 500, seed=43)
    assert not np.array_equal(a.codes, b.codes)


def test_shorter_sample_is_a_prefix(toy1):
    short = sample_dataset(toy1, 100, seed=7)
    long = sample_dataset(toy1, 1000, seed=7)
    assert np.array_equal(short.codes, long.codes[:100])


def test_seed_range_enforced(toy1):
    with pytest.raises(ValueError, match="64-bit"):
        sample_dataset(toy1, 10, seed=-1)
    with pytest.raises(ValueError, match="64-bit"):
        sample_dataset(toy1, 10, seed=2**64)


def test_columns_follow_roles(toy1, with_l):
    assert sample_dataset(toy1, 5, seed=0).columns == ("A", "D", "Y")
    assert sample_dataset(with_l, 5, seed=0).columns == ("A", "D", "Y", "L")


def test_outcome_masked_exactly_when_event_occurs(toy1):
    ds = sample_dataset(toy1, 2000, seed=3)
    d = ds.column("D")
    y = ds.column("Y")
    assert ((y == UNDEFINED) == (d == 1)).all()


def test_no_masking_without_truncation(birthweight):
    ds = sample_dataset(birthweight, 2000, seed=3)
    assert (ds.column("Y") != UNDEFINED).all()


def test_sampled_frequencies_match_law_chi_square(toy1, with_l):
    # Goodness of fit of the empirical cell counts against the exact law,
    # 0.1% significance, so a wrong sampler fails loudly and a correct one
    # flakes roughly one run in a thousand.
    n = 200_000
    for model in (toy1, with_l):
        cells = oracle.observed_cells(model)
        ds = sample_dataset(model, n, seed=11)
        counts = {key: 0 for key in cells}
        for row in ds.rows():
            counts[row] += 1
        chi2 = 0.0
        for key, p in cells.items():
            expected = n * p
            chi2 += (counts[key] - expected) ** 2 / expected
        cutoff = stats.chi2.ppf(0.999, df=len(cells) - 1)
        assert chi2 < cutoff


def test_csv_round_trip(toy1):
    ds = sample_dataset(toy1, 300, seed=5)
    text = dataset_to_csv(ds)
    back, rejected = dataset_from_csv(text)
    assert rejected == []
    assert back.columns == ds.columns
    assert np.array_equal(back.codes, ds.codes)


def test_csv_blank_outcome_only_for_event_rows(toy1):
    ds = sample_dataset(toy1, 50, seed=9)
    lines = dataset_to_csv(ds).splitlines()
    assert lines[0] == "A,D,Y"
    for line in lines[1:]:
        a, d, y = line.split(",")
        assert (y == "") == (d == "1")


def test_csv_header_required():
    with pytest.raises(ScenarioError, match="empty CSV"):
        dataset_from_csv("")
    with pytest.raises(ScenarioError, match="unexpected CSV header"):
        dataset_from_csv("A,B,C\n1,0,1\n")


def test_csv_field_count_enforced():
    with pytest.raises(ScenarioError, match="2 fields"):
        dataset_from_csv("A,D,Y\n1,0\n")


def test_csv_non_integer_rejected():
    with pytest.raises(ScenarioError, match="non-integer"):
        dataset_from_csv("A,D,Y\n1,0,x\n")


def test_csv_treatment_and_event_must_be_binary():
    with pytest.raises(ScenarioError, match="A must be 0 or 1"):
        dataset_from_csv("A,D,Y\n2,0,1\n")
    with pytest.raises(ScenarioError, match="D must be 0 or 1"):
        dataset_from_csv("A,D,Y\n1,3,1\n")


def test_csv_blank_outcome_with_event_kept_as_undefined():
    ds, rejected = dataset_from_csv("A,D,Y\n1,1,\n0,0,1\n")
    assert rejected == []
    assert ds.n == 2
    assert ds.codes[0, 2] == UNDEFINED
    assert ds.codes[1, 2] == 1


def test_csv_blank_outcome_without_event_rejected_per_row():
    ds, rejected = dataset_from_csv("A,D,Y\n1,0,\n0,0,1\n")
    assert rejected == [(2, "blank Y on a row with D=0")]
    assert ds.n == 1
