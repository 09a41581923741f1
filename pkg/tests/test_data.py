import numpy as np
import pytest

from klsurv import (
    CovariateSchema,
    DimensionError,
    SubjectRecord,
    SurvivalDataset,
    expand_person_period,
)


def test_schema_rejects_duplicates_and_empty_names():
    with pytest.raises(ValueError):
        CovariateSchema(("a", "a"))
    with pytest.raises(ValueError):
        CovariateSchema(("a", ""))
    schema = CovariateSchema(("age", "dialysis"))
    assert schema.p == 2


def test_record_validation():
    with pytest.raises(ValueError):
        SubjectRecord("s1", 2, True, np.array([1.0, np.nan]))
    with pytest.raises(ValueError):
        SubjectRecord("s1", 0, False, np.array([1.0]))
    with pytest.raises(DimensionError):
        SubjectRecord("s1", 1, False, np.zeros((2, 2)))


def test_dataset_validation():
    schema = CovariateSchema(("a",))
    good = SubjectRecord("s1", 2, True, np.array([0.5]))
    with pytest.raises(DimensionError):
        SurvivalDataset(schema, (SubjectRecord("s2", 1, False, np.array([1.0, 2.0])),), 3)
    with pytest.raises(ValueError):
        SurvivalDataset(schema, (good,), 1)  # observed beyond tau
    data = SurvivalDataset(schema, (good,), 3)
    assert data.n == 1 and data.n_events == 1


def test_expansion_event_subject():
    data = SurvivalDataset.from_arrays([3], [True], np.array([[1.0]]), tau=4)
    table = expand_person_period(data)
    assert table.period.tolist() == [1, 2, 3]
    assert table.death.tolist() == [0.0, 0.0, 1.0]


def test_expansion_censored_subject():
    data = SurvivalDataset.from_arrays([2], [False], np.array([[1.0]]), tau=4)
    table = expand_person_period(data)
    assert table.period.tolist() == [1, 2]
    assert table.death.tolist() == [0.0, 0.0]


def test_expansion_row_count():
    data = SurvivalDataset.from_arrays(
        [3, 2], [True, False], np.array([[1.0], [2.0]]), tau=3
    )
    table = expand_person_period(data)
    assert table.n_rows == 5
    assert table.period_counts.tolist() == [2, 2, 1]


def test_expansion_is_lossless():
    rng = np.random.default_rng(42)
    for _ in range(20):
        n, tau, p = 8, 5, 2
        times = rng.integers(1, tau + 1, size=n)
        events = rng.random(n) < 0.5
        data = SurvivalDataset.from_arrays(times, events, rng.normal(size=(n, p)), tau=tau)
        table = expand_person_period(data)
        # recover observed_time and event flag from the table alone
        for i in range(n):
            rows = table.subject_index == i
            periods = table.period[rows]
            assert periods.tolist() == list(range(1, times[i] + 1))
            deaths = table.death[rows]
            assert deaths[:-1].sum() == 0.0
            assert bool(deaths[-1]) == bool(events[i])
        assert table.death.sum() == data.n_events
        np.testing.assert_array_equal(table.covariates, data.covariate_matrix[table.subject_index])


def test_subset_by_mask_and_indices():
    data = SurvivalDataset.from_arrays(
        [1, 2, 3], [True, False, True], np.arange(6, dtype=float).reshape(3, 2), tau=3
    )
    sub = data.subset(np.array([True, False, True]))
    assert [rec.id for rec in sub.subjects] == [0, 2]
    assert sub.tau == data.tau and sub.schema is data.schema
    sub2 = data.subset([1])
    assert sub2.n == 1 and sub2.subjects[0].id == 1


def test_from_arrays_defaults():
    data = SurvivalDataset.from_arrays([2, 1], [True, False], np.zeros((2, 3)))
    assert data.schema.names == ("x1", "x2", "x3")
    assert data.tau == 2
    assert [rec.id for rec in data.subjects] == [0, 1]
