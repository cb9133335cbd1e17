import random

import pytest
from conftest import fake_metrics
from oracles import brute_slope, percentile_summary

from convovol.longitudinal import (
    DegenerateX,
    EmptyInput,
    InsufficientPoints,
    NoSlopes,
    UnknownStudent,
    cohort_slope_stats,
    corpus_characteristics,
    five_number_summary,
    ordinal_average_mcv,
    regression_slope,
    student_trend,
)
from convovol.metrics import Corpus
from convovol.volatility import Segment


def corpus_with(student_icvs, mcv=5.0):
    """``student_icvs`` maps student -> list of i-CV values (one meeting each)."""
    meetings = []
    for s, values in student_icvs.items():
        for k, v in enumerate(values, start=1):
            meetings.append(fake_metrics(f"{s}-{k}", f"2024-01-{k:02d}", icv={s: v, "tutor": 1.0}, mcv=mcv))
    return Corpus(tuple(student_icvs), tuple(meetings))


def test_slope_lines():
    assert regression_slope([(x, x) for x in range(1, 6)]) == pytest.approx(1.0, abs=1e-12)
    assert regression_slope([(x, -x) for x in range(1, 6)]) == pytest.approx(-1.0, abs=1e-12)
    assert regression_slope([(1, 3), (2, 3), (5, 3)]) == 0.0


def test_slope_errors():
    with pytest.raises(InsufficientPoints):
        regression_slope([(1, 1)])
    with pytest.raises(DegenerateX):
        regression_slope([(2, 1), (2, 5)])


def test_slope_matches_oracle():
    rng = random.Random(2)
    for _ in range(100):
        pts = [(rng.uniform(-5, 5), rng.uniform(-5, 5)) for _ in range(rng.randint(2, 20))]
        assert regression_slope(pts) == pytest.approx(brute_slope(*zip(*pts)), rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("values, slope", [([2, 3, 4, 5], 1.0), ([5, 4, 3], -1.0)])
def test_student_trend(values, slope):
    trend = student_trend(corpus_with({"s1": values}), "s1")
    assert trend.slope == pytest.approx(slope, abs=1e-12)
    assert [p.x for p in trend.points] == list(range(1, len(values) + 1))


def test_trend_single_meeting_absent():
    assert student_trend(corpus_with({"s1": [3.0]}), "s1").slope is None


def test_trend_skips_absent_but_keeps_ordinals():
    trend = student_trend(corpus_with({"s1": [1.0, None, 3.0]}), "s1")
    assert [p.x for p in trend.points] == [1, 3]
    assert trend.slope == pytest.approx(1.0)


def test_trend_unknown_student():
    with pytest.raises(UnknownStudent):
        student_trend(corpus_with({"s1": [1.0]}), "nobody")


def test_trend_orders_by_date():
    meetings = (
        fake_metrics("b", "2024-03-01", icv={"s": 1.0}),
        fake_metrics("a", "2024-01-01", icv={"s": 3.0}),
    )
    trend = student_trend(Corpus(("s",), meetings), "s")
    assert [p.meeting_id for p in trend.points] == ["a", "b"]
    assert trend.slope == -2.0


def test_ordinal_average():
    c = Corpus(("s1", "s2"), (
        fake_metrics("a", "2024-01-01", icv={"s1": 1.0}, mcv=6.0),
        fake_metrics("b", "2024-01-02", icv={"s2": 1.0}, mcv=6.0),
    ))
    rows = ordinal_average_mcv(c)
    assert [(r.ordinal, r.mean_mcv, r.n) for r in rows] == [(1, 6.0, 2)]


def test_ordinal_average_empty():
    assert ordinal_average_mcv(Corpus((), ())) == []


def test_ordinal_average_skips_absent():
    c = Corpus(("s1", "s2"), (
        fake_metrics("a", "2024-01-01", icv={"s1": 1.0}, mcv=4.0),
        fake_metrics("b", "2024-01-02", icv={"s2": 1.0}, mcv=None),
    ))
    assert [(r.mean_mcv, r.n) for r in ordinal_average_mcv(c)] == [(4.0, 1)]


def test_five_number_summary_cases():
    s = five_number_summary([1, 2, 3, 4])
    assert (s.min, s.q1, s.median, s.q3, s.max) == (1, 1.75, 2.5, 3.25, 4)
    s = five_number_summary([5])
    assert (s.min, s.q1, s.median, s.q3, s.max) == (5, 5, 5, 5, 5)
    s = five_number_summary([1, 1, 1, 9])
    assert (s.min, s.median, s.max, s.q3) == (1, 1, 9, 3)
    with pytest.raises(EmptyInput):
        five_number_summary([])


def test_five_number_matches_percentile():
    rng = random.Random(9)
    for _ in range(50):
        values = [rng.gauss(0, 3) for _ in range(rng.randint(1, 40))]
        s = five_number_summary(values)
        assert (s.min, s.q1, s.median, s.q3, s.max) == pytest.approx(percentile_summary(values), abs=1e-9)


def test_cohort_slopes_symmetric():
    c = corpus_with({"a": [1, 2, 3], "b": [2, 2, 2], "c": [3, 2, 1]})
    stats = cohort_slope_stats(c)
    assert stats.mean == pytest.approx(0.0, abs=1e-12)
    assert stats.summary.median == pytest.approx(0.0, abs=1e-12)
    assert (stats.n_students, stats.n_excluded) == (3, 0)


def test_cohort_single_slope():
    stats = cohort_slope_stats(corpus_with({"a": [1.0, 1.7], "b": [4.0]}))
    s = stats.summary
    assert stats.mean == pytest.approx(0.7)
    assert s.q1 == s.median == s.q3 == pytest.approx(0.7)
    assert stats.n_excluded == 1


def test_cohort_no_slopes():
    with pytest.raises(NoSlopes):
        cohort_slope_stats(corpus_with({"a": [1.0]}))


def test_cohort_segment_selection():
    meetings = tuple(
        fake_metrics(f"m{k}", f"2024-01-0{k}", icv={"s": {"whole": k, "first_half": -k, "second_half": 2 * k}})
        for k in (1, 2, 3)
    )
    c = Corpus(("s",), meetings)
    assert cohort_slope_stats(c, "h1").mean == pytest.approx(-1.0)
    assert cohort_slope_stats(c, Segment.SECOND_HALF).mean == pytest.approx(2.0)


def test_characteristics_single_meeting():
    c = Corpus(("s",), (fake_metrics("m", "2024-01-01", icv={"s": 2.0, "t": 1.0},
                                     shares={"s": 0.4, "t": 0.6}, mcv=3.0, duration_s=600.0),))
    ch = corpus_characteristics(c)
    assert ch.total_duration == 600.0
    assert ch.mean_focal_share == pytest.approx(0.40)
    assert (ch.n_students, ch.n_meetings, ch.mean_participants, ch.mean_mcv, ch.mean_icv) == (1, 1, 2, 3.0, 2.0)


def test_characteristics_empty():
    ch = corpus_characteristics(Corpus((), ()))
    assert (ch.n_students, ch.n_meetings, ch.total_duration) == (0, 0, 0)
    assert ch.mean_meeting_duration is None and ch.mean_focal_share is None and ch.mean_mcv is None
