import random
import sys
from pathlib import Path

import pytest

from convovol.conversation import Meeting, Utterance
from convovol.metrics import Config
from convovol.store import CorpusStore
from convovol.vtt import RawCue

FIXTURES = Path(__file__).parent / "fixtures" / "vtt"


def cue(speaker, start, end, text="x", index=None):
    return RawCue(round(start * 1000), round(end * 1000), text, speaker=speaker, index=index)


def meeting_from(spans, meeting_id="m", participants=None, **kw):
    """``spans`` is a list of (speaker, start_s, end_s)."""
    utts = tuple(
        Utterance(who, round(a * 1000), round(b * 1000), "x", (i,))
        for i, (who, a, b) in enumerate(sorted(spans, key=lambda s: s[1]))
    )
    if participants is None:
        participants = tuple(dict.fromkeys(u.speaker_id for u in utts))
    return Meeting(meeting_id, utts, tuple(participants), **kw)


def meeting_from_durations(durations, speakers=("A", "B"), gap=0.5):
    spans, t = [], 0.0
    for i, d in enumerate(durations):
        spans.append((speakers[i % len(speakers)], t, t + d))
        t += d + gap
    return meeting_from(spans, participants=speakers)


def random_meeting(rng: random.Random, n_speakers=None, n_utts=None):
    n_speakers = n_speakers or rng.randint(1, 5)
    n_utts = n_utts if n_utts is not None else rng.randint(1, 60)
    names = [f"P{i}" for i in range(n_speakers)]
    spans, t = [], rng.uniform(0, 100)
    for _ in range(n_utts):
        d = round(rng.uniform(0, 15), 3)
        spans.append((rng.choice(names), t, t + d))
        t += d + rng.uniform(0, 3)
    return meeting_from(spans, participants=names)


def vtt_doc(rows):
    """Build a VTT document from (speaker, start_s, end_s, text) rows."""
    out = ["WEBVTT", ""]
    for i, (who, a, b, text) in enumerate(rows, start=1):
        out += [str(i), f"{_ts(a)} --> {_ts(b)}", f"{who}: {text}", ""]
    return "\n".join(out)


def _ts(seconds):
    ms = round(seconds * 1000)
    h, rem = divmod(ms, 3_600_000)
    m, rem = divmod(rem, 60_000)
    s, ms = divmod(rem, 1000)
    return f"{h:02d}:{m:02d}:{s:02d}.{ms:03d}"


@pytest.fixture
def store(tmp_path):
    return CorpusStore.init(tmp_path / "corpus", Config())


@pytest.fixture
def equal_speakers_vtt():
    return vtt_doc([
        ("Alice", 0, 10, "bonjour"), ("Bob", 11, 21, "salut"),
        ("Alice", 22.5, 42.5, "ça va"), ("Bob", 44, 64, "oui"),
    ])


def fake_metrics(meeting_id, date, icv=None, mcv=None, shares=None, participants=None, duration_s=600.0):
    """Hand-built MeetingMetrics. ``icv`` maps speaker -> value or segment dict."""
    from convovol.metrics import MeetingMetrics, SpeakerMetrics
    from convovol.turn_taking import TransitionMatrix
    from convovol.volatility import Segment

    icv = icv or {}
    shares = shares or {}
    participants = tuple(participants or dict.fromkeys([*icv, *shares]))

    def per_segment(v):
        if isinstance(v, dict):
            return {Segment.parse(k): v.get(k) for k in v} | {s: v.get(s, v.get(s.value)) for s in Segment}
        return {Segment.WHOLE: v, Segment.FIRST_HALF: v, Segment.SECOND_HALF: v}

    if not isinstance(mcv, dict):
        mcv = {s: mcv for s in Segment}
    speakers = {
        p: SpeakerMetrics(shares.get(p), 0.0, 0, per_segment(icv.get(p)))
        for p in participants
    }
    n = len(participants)
    return MeetingMetrics(
        meeting_id=meeting_id, participants=participants, speakers=speakers, mcv=mcv,
        transitions=TransitionMatrix(participants, tuple((0,) * n for _ in range(n))),
        n_utterances=1, duration_s=duration_s, split_s=None, config={}, date=date,
    )


SVG_NS = "{http://www.w3.org/2000/svg}"


def svg_roots(text):
    """Parse every inline <svg> element in ``text`` (an SVG or HTML document)."""
    import re
    import xml.etree.ElementTree as ET

    return [ET.fromstring(m) for m in re.findall(r"<svg\b.*?</svg>", text, flags=re.DOTALL)]


def svg_all(root, tag, **attrs):
    """Elements of ``tag`` whose ``data-*`` attributes match ``attrs`` (underscores become dashes)."""
    want = {f"data-{k.replace('_', '-')}": v for k, v in attrs.items()}
    return [e for e in root.iter(SVG_NS + tag) if all(e.get(k) == v for k, v in want.items())]


def panel_svg(html, panel):
    import re

    m = re.search(rf'<section data-panel="{panel}">(.*?)</section>', html, flags=re.DOTALL)
    assert m, f"no {panel} panel"
    roots = svg_roots(m.group(1))
    return roots[0] if roots else None


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
