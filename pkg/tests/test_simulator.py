import pytest

from convovol.conversation import build_meeting
from convovol.simulator import (
    InvalidParams,
    SimParams,
    meeting_to_cues,
    simulate_meeting,
    sweep,
)
from convovol.volatility import meeting_cv
from convovol.vtt import parse_transcript, serialize_transcript

CONSTANT = SimParams(long_turn_range=(5, 5), inter_turn_gap_range=(1, 1), backchannel_rate=0.0)


def test_constant_turns_zero_volatility():
    m = simulate_meeting(CONSTANT)
    assert {u.duration for u in m.utterances} == {5.0}
    assert meeting_cv(m).value == 0.0


def test_deterministic():
    p = SimParams(backchannel_rate=0.4, seed=123)
    assert simulate_meeting(p).utterances == simulate_meeting(p).utterances
    assert simulate_meeting(p).utterances != simulate_meeting(p.with_seed(124)).utterances


def test_reaches_target_and_stops():
    m = simulate_meeting(SimParams(target_duration=120, seed=3))
    last = m.utterances[-1]
    assert last.start_ms < 120_000
    assert m.utterances[-2].end_ms < 120_000


def test_no_self_transitions_by_default():
    m = simulate_meeting(SimParams(n_speakers=4, seed=5))
    assert all(a.speaker_id != b.speaker_id for a, b in zip(m.utterances, m.utterances[1:]))
    assert set(m.participants) == {"S1", "S2", "S3", "S4"}


def test_backchannel_durations_in_range():
    m = simulate_meeting(SimParams(backchannel_rate=1.0, seed=8))
    assert all(0.3 <= u.duration <= 1.0 for u in m.utterances)


def test_vtt_round_trip_preserves_meeting():
    m = simulate_meeting(SimParams(backchannel_rate=0.5, seed=2))
    cues = parse_transcript(serialize_transcript(meeting_to_cues(m))).cues
    rebuilt = build_meeting("sim", cues, 1.0)
    assert [(u.speaker_id, u.start_ms, u.end_ms) for u in rebuilt.utterances] == \
        [(u.speaker_id, u.start_ms, u.end_ms) for u in m.utterances]


def test_sweep_constant():
    rows = sweep(CONSTANT, [0.0], 5)
    assert len(rows) == 1 and rows[0].mean_mcv == 0.0 and rows[0].n_runs == 5


def test_sweep_half_beats_zero():
    low, high = sweep(SimParams(seed=100), [0.0, 0.5], 200)
    assert high.mean_mcv > low.mean_mcv


def test_sweep_zero_runs():
    with pytest.raises(InvalidParams):
        sweep(SimParams(), [0.0], 0)


@pytest.mark.parametrize("kwargs", [
    {"n_speakers": 1},
    {"backchannel_rate": 1.5},
    {"self_transition_prob": 1.0},
    {"long_turn_range": (8, 4)},
    {"target_duration": 0},
    {"inter_turn_gap_range": (0.0001, 0.0009)},
])
def test_invalid_params(kwargs):
    with pytest.raises(InvalidParams):
        simulate_meeting(SimParams(**kwargs))
