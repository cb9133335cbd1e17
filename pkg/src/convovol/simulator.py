"""Synthetic meetings with a tunable mix of backchannels and long turns.

Used to check that volatility rises as conversations mix short
acknowledgements with longer contributions. Durations and gaps are drawn on a
millisecond grid so generated meetings survive a VTT round trip unchanged.
"""

from __future__ import annotations

import dataclasses
import math
import platform
import random
from collections.abc import Sequence
from dataclasses import dataclass

from .conversation import Meeting, Utterance
from .volatility import SAMPLE, individual_cv, meeting_cv
from .vtt import RawCue

GENERATOR = f"python random.Random (MT19937), CPython {platform.python_version()}"


class InvalidParams(ValueError):
    pass


@dataclass(frozen=True)
class SimParams:
    n_speakers: int = 3
    target_duration: float = 600.0
    long_turn_range: tuple[float, float] = (4.0, 8.0)
    backchannel_range: tuple[float, float] = (0.3, 1.0)
    backchannel_rate: float = 0.0
    inter_turn_gap_range: tuple[float, float] = (0.2, 1.0)
    self_transition_prob: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if self.n_speakers < 2:
            raise InvalidParams("n_speakers must be >= 2")
        if self.target_duration <= 0:
            raise InvalidParams("target_duration must be > 0")
        for name in ("long_turn_range", "backchannel_range", "inter_turn_gap_range"):
            lo, hi = getattr(self, name)
            if not 0 <= lo <= hi:
                raise InvalidParams(f"{name} must satisfy 0 <= min <= max, got {(lo, hi)}")
            if math.ceil(lo * 1000) > math.floor(hi * 1000):
                raise InvalidParams(f"{name} contains no whole millisecond")
        if not 0 <= self.backchannel_rate <= 1:
            raise InvalidParams("backchannel_rate must be in [0, 1]")
        if not 0 <= self.self_transition_prob < 1:
            raise InvalidParams("self_transition_prob must be in [0, 1)")

    def with_seed(self, seed: int) -> SimParams:
        return dataclasses.replace(self, seed=seed)


@dataclass(frozen=True)
class SweepRow:
    beta: float
    mean_mcv: float | None
    mean_icv: float | None
    n_runs: int


def _uniform_ms(rng: random.Random, bounds: tuple[float, float]) -> int:
    return rng.randint(math.ceil(bounds[0] * 1000), math.floor(bounds[1] * 1000))


def simulate_meeting(params: SimParams, meeting_id: str = "sim") -> Meeting:
    """Generate one meeting; identical params (seed included) give identical meetings.

    Speakers are ``S1..Sn``. After each utterance the same speaker continues
    with ``self_transition_prob``, otherwise one of the others is picked
    uniformly. Each utterance is a backchannel with probability
    ``backchannel_rate``, else a long turn. Generation stops once the clock
    reaches ``target_duration``.
    """
    params.validate()
    rng = random.Random(params.seed)
    speakers = tuple(f"S{i + 1}" for i in range(params.n_speakers))
    target_ms = round(params.target_duration * 1000)
    utterances = []
    clock = 0
    who = rng.randrange(params.n_speakers)
    while clock < target_ms:
        backchannel = rng.random() < params.backchannel_rate
        duration = _uniform_ms(rng, params.backchannel_range if backchannel else params.long_turn_range)
        utterances.append(Utterance(speakers[who], clock, clock + duration, "mm" if backchannel else "blah",
                                    (len(utterances),)))
        clock += duration + _uniform_ms(rng, params.inter_turn_gap_range)
        if rng.random() >= params.self_transition_prob:
            who = (who + rng.randrange(1, params.n_speakers)) % params.n_speakers
    return Meeting(meeting_id, tuple(utterances), speakers)


def meeting_to_cues(meeting: Meeting, names: dict[str, str] | None = None) -> list[RawCue]:
    names = names or {}
    return [
        RawCue(u.start_ms, u.end_ms, u.text or "...", speaker=names.get(u.speaker_id, u.speaker_id), index=i)
        for i, u in enumerate(meeting.utterances, start=1)
    ]


def sweep(params_base: SimParams, betas: Sequence[float], n_runs: int, mode: str = SAMPLE) -> list[SweepRow]:
    """Mean m-CV and mean i-CV per backchannel rate over ``n_runs`` meetings.

    Run ``i`` uses seed ``params_base.seed + i`` for every rate, so rows
    differ only through the rate. The i-CV mean pools every speaker of every
    run that has a value.
    """
    if n_runs < 1:
        raise InvalidParams("n_runs must be >= 1")
    rows = []
    for beta in betas:
        base = dataclasses.replace(params_base, backchannel_rate=beta)
        base.validate()
        mcvs, icvs = [], []
        for i in range(n_runs):
            meeting = simulate_meeting(base.with_seed(params_base.seed + i))
            value = meeting_cv(meeting, mode).value
            if value is not None:
                mcvs.append(value)
            for who in meeting.participants:
                value = individual_cv(meeting, who, mode).value
                if value is not None:
                    icvs.append(value)
        rows.append(SweepRow(
            beta,
            math.fsum(mcvs) / len(mcvs) if mcvs else None,
            math.fsum(icvs) / len(icvs) if icvs else None,
            n_runs,
        ))
    return rows
