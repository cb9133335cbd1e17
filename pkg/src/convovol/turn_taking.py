"""Speaker-to-speaker turn transitions, the data behind a chord diagram."""

from __future__ import annotations

from dataclasses import dataclass

from .conversation import Meeting


class EmptyMatrix(ValueError):
    pass


@dataclass(frozen=True)
class TransitionMatrix:
    speakers: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]

    def count(self, source: str, target: str) -> int:
        return self.counts[self.speakers.index(source)][self.speakers.index(target)]

    def total(self) -> int:
        return sum(map(sum, self.counts))


@dataclass(frozen=True)
class Ribbon:
    source: str
    target: str
    weight: float
    count: int


@dataclass(frozen=True)
class ChordData:
    ribbons: tuple[Ribbon, ...]
    # share of each speaker's outgoing transitions that return to themselves
    self_continuation: dict[str, float]


def transition_counts(meeting: Meeting) -> TransitionMatrix:
    """Count how often an utterance by one speaker is followed by one from another.

    Rows and columns follow ``meeting.participants``. Same-speaker successions
    (turns the merge step kept apart) land on the diagonal.
    """
    pos = {who: i for i, who in enumerate(meeting.participants)}
    n = len(pos)
    grid = [[0] * n for _ in range(n)]
    utts = meeting.utterances
    for a, b in zip(utts, utts[1:]):
        grid[pos[a.speaker_id]][pos[b.speaker_id]] += 1
    return TransitionMatrix(tuple(meeting.participants), tuple(map(tuple, grid)))


def chord_data(matrix: TransitionMatrix) -> ChordData:
    """Normalise between-speaker transitions into ribbon weights summing to 1.

    Diagonal counts are excluded from the normalisation and reported as
    per-speaker self-continuation fractions instead.

    Raises:
        EmptyMatrix: the matrix holds no transitions at all.
    """
    if matrix.total() == 0:
        raise EmptyMatrix("transition matrix is all zeros")
    speakers, counts = matrix.speakers, matrix.counts
    off_diagonal = matrix.total() - sum(counts[i][i] for i in range(len(speakers)))
    ribbons = tuple(
        Ribbon(a, b, counts[i][j] / off_diagonal, counts[i][j])
        for i, a in enumerate(speakers)
        for j, b in enumerate(speakers)
        if i != j and counts[i][j]
    )
    self_continuation = {
        a: counts[i][i] / sum(counts[i]) for i, a in enumerate(speakers) if sum(counts[i])
    }
    return ChordData(ribbons, self_continuation)
