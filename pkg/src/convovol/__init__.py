"""Conversational volatility analytics for timestamped meeting transcripts."""

from .conversation import (
    Meeting,
    Utterance,
    build_meeting,
    merge_cues,
    participation_shares,
    split_meeting,
)
from .metrics import Config, Corpus, MeetingMetrics, analyze_meeting
from .volatility import (
    Segment,
    conversational_volatility,
    individual_cv,
    meeting_cv,
    segmented_cvs,
)
from .vtt import RawCue, parse_transcript

__version__ = "0.1.0"

__all__ = [
    "Config",
    "Corpus",
    "Meeting",
    "MeetingMetrics",
    "RawCue",
    "Segment",
    "Utterance",
    "analyze_meeting",
    "build_meeting",
    "conversational_volatility",
    "individual_cv",
    "meeting_cv",
    "merge_cues",
    "parse_transcript",
    "participation_shares",
    "segmented_cvs",
    "split_meeting",
]
