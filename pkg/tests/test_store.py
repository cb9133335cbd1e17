import json
import threading

import pytest
from conftest import FIXTURES, vtt_doc

from convovol.metrics import Config
from convovol.store import (
    REJECT_UNKNOWN,
    AliasTable,
    CorpusStore,
    StorageFailure,
    StoreError,
    UnknownMeeting,
    UnknownSpeakers,
    open_store,
    resolve_speakers,
)
from convovol.vtt import MissingHeader

TWO_SPEAKERS = vtt_doc([("Alice", 0, 4, "a"), ("Bob", 5, 6, "b"), ("Alice", 7, 9, "c"), ("Bob", 10, 14, "d")])
OTHER = vtt_doc([("Alice", 0, 1, "a"), ("Bob", 2, 8, "b"), ("Alice", 9, 9.5, "c"), ("Bob", 11, 12, "d")])


def test_register_distinct_and_listed(store):
    a = store.register_meeting("2024-02-01", "FR101")
    b = store.register_meeting("2024-02-01", "FR101")
    assert a != b
    assert {r.meeting_id for r in store.list_meetings()} == {a, b}
    assert len(a) == 8


def test_register_survives_reopen(store):
    mid = store.register_meeting("2024-02-01", "FR101", split_point=30.0, video_link="https://example.org/v")
    record = CorpusStore(store.root).get_record(mid)
    assert (record.date, record.course_tag, record.split_point) == ("2024-02-01", "FR101", 30.0)


def test_register_seeded_ids_repeat(tmp_path):
    ids = []
    for name in ("a", "b"):
        s = CorpusStore.init(tmp_path / name)
        ids.append(s.register_meeting("2024-01-01", "x", seed=42))
    assert ids[0] == ids[1]


def test_seeded_collision_retries(store):
    assert store.register_meeting("2024-01-01", "x", seed=1) != store.register_meeting("2024-01-01", "x", seed=1)


def test_uninitialized_root(tmp_path):
    with pytest.raises(StorageFailure):
        CorpusStore(tmp_path / "nothing").register_meeting("2024-01-01", "x")
    with pytest.raises(StorageFailure):
        open_store(tmp_path / "nothing")
    with pytest.raises(StorageFailure):
        open_store(None)


def test_init_idempotent_keeps_config(tmp_path):
    CorpusStore.init(tmp_path / "c", Config(gap_threshold=0.5))
    s = CorpusStore.init(tmp_path / "c", Config(gap_threshold=2.0))
    assert s.config().gap_threshold == 0.5


def test_attach_valid(store):
    mid = store.register_meeting("2024-02-01", "FR101")
    report = store.attach_transcript(mid, TWO_SPEAKERS)
    assert report.warnings == ()
    assert (store.root / "meetings" / mid / "transcript.vtt").read_text(encoding="utf-8") == TWO_SPEAKERS


def test_attach_unknown_meeting(store):
    with pytest.raises(UnknownMeeting):
        store.attach_transcript("zzzzzzzz", TWO_SPEAKERS)
    with pytest.raises(UnknownMeeting):
        store.attach_transcript("../../etc", TWO_SPEAKERS)


def test_attach_bad_document_writes_nothing(store):
    mid = store.register_meeting("2024-02-01", "FR101")
    with pytest.raises(MissingHeader):
        store.attach_transcript(mid, "hello")
    assert store.get_record(mid).transcript_path is None
    assert not (store.root / "meetings" / mid / "transcript.vtt").exists()


def test_reattach_invalidates_cache(store):
    mid = store.register_meeting("2024-02-01", "FR101")
    store.attach_transcript(mid, TWO_SPEAKERS)
    first, fresh = store.meeting_metrics(mid, store.config())
    assert fresh
    again, fresh = store.meeting_metrics(mid, store.config())
    assert not fresh and again == first
    store.attach_transcript(mid, OTHER)
    second, fresh = store.meeting_metrics(mid, store.config())
    assert fresh and second.mcv != first.mcv


def test_crlf_transcript_checksum_stable(store):
    mid = store.register_meeting("2024-02-01", "FR101")
    raw = (FIXTURES / "05_bom_crlf.vtt").read_bytes().decode("utf-8")
    store.attach_transcript(mid, raw)
    before = (store.root / "meetings" / mid / "meta.json").read_bytes()
    store.meeting_metrics(mid, store.config())
    assert (store.root / "meetings" / mid / "meta.json").read_bytes() == before


def test_untranscribed_meeting_metrics_null(store):
    mid = store.register_meeting("2024-02-01", "FR101")
    m, _ = store.meeting_metrics(mid, store.config())
    assert m.n_utterances == 0
    assert all(v is None for v in m.mcv.values())


def test_resolve_speakers():
    table = AliasTable({"Alice M": "s01"})
    assert resolve_speakers(["Alice M"], table) == {"Alice M": "s01"}
    assert resolve_speakers(["Bob"], table) == {"Bob": "ext-bob"}
    assert resolve_speakers(["Jean-Luc Picard"], table) == {"Jean-Luc Picard": "ext-jean-luc-picard"}
    with pytest.raises(UnknownSpeakers) as info:
        resolve_speakers(["Alice M", "Bob"], AliasTable({"Alice M": "s01"}, REJECT_UNKNOWN))
    assert info.value.names == ["Bob"]


def test_alias_policy_reject_blocks_attach(store):
    store.add_student("s01", ["Alice"])
    store.set_alias_policy(REJECT_UNKNOWN)
    mid = store.register_meeting("2024-02-01", "FR101")
    with pytest.raises(UnknownSpeakers):
        store.attach_transcript(mid, TWO_SPEAKERS)
    assert store.get_record(mid).transcript_path is None


def test_aliases_resolve_to_student(store):
    store.add_student("s01", ["Alice"])
    mid = store.register_meeting("2024-02-01", "FR101")
    store.attach_transcript(mid, TWO_SPEAKERS)
    m, _ = store.meeting_metrics(mid, store.config())
    assert m.participants == ("s01", "ext-bob")
    assert store.students() == ("s01",)


def test_alias_conflict(store):
    store.add_student("s01", ["Alice"])
    with pytest.raises(StoreError):
        store.add_student("s02", ["Alice"])


def test_load_corpus(store):
    ids = [store.register_meeting(f"2024-02-0{i}", "FR101") for i in (1, 2)]
    for mid in ids:
        store.attach_transcript(mid, TWO_SPEAKERS)
    loaded = store.load_corpus()
    assert len(loaded.corpus.meetings) == 2
    assert loaded.failures == {} and loaded.pending == ()


def test_load_corpus_pending(store):
    mid = store.register_meeting("2024-02-01", "FR101")
    assert store.load_corpus().pending == (mid,)


def test_config_change_recomputes_all(store):
    ids = [store.register_meeting("2024-02-01", "FR101") for _ in range(3)]
    for mid in ids:
        store.attach_transcript(mid, TWO_SPEAKERS)
    assert set(store.load_corpus().recomputed) == set(ids)
    assert store.load_corpus().recomputed == ()
    assert set(store.load_corpus(store.config(gap_threshold=0.5)).recomputed) == set(ids)
    assert set(store.load_corpus(store.config(gap_threshold=0.5)).recomputed) == set()


def test_corrupt_transcript_isolated(store):
    ids = [store.register_meeting("2024-02-01", "FR101") for _ in range(3)]
    for mid in ids:
        store.attach_transcript(mid, TWO_SPEAKERS)
    (store.root / "meetings" / ids[1] / "transcript.vtt").write_text("garbage", encoding="utf-8")
    loaded = store.load_corpus()
    assert len(loaded.corpus.meetings) == 2
    assert list(loaded.failures) == [ids[1]]
    assert "MissingHeader" in loaded.failures[ids[1]]


def test_stale_meta_is_repaired(store):
    # simulate a crash between the transcript rename and the meta rename
    store.add_student("s01", ["Carol"])
    mid = store.register_meeting("2024-02-01", "FR101")
    store.attach_transcript(mid, TWO_SPEAKERS)
    replacement = vtt_doc([("Carol", 0, 2, "x"), ("Bob", 3, 5, "y")])
    (store.root / "meetings" / mid / "transcript.vtt").write_text(replacement, encoding="utf-8")
    m, _ = store.meeting_metrics(mid, store.config())
    assert m.participants == ("s01", "ext-bob")
    meta = json.loads((store.root / "meetings" / mid / "meta.json").read_text())
    assert meta["participants_resolved"] == {"Carol": "s01", "Bob": "ext-bob"}


def test_corrupt_cache_recomputed(store):
    mid = store.register_meeting("2024-02-01", "FR101")
    store.attach_transcript(mid, TWO_SPEAKERS)
    good, _ = store.meeting_metrics(mid, store.config())
    (store.root / "meetings" / mid / "metrics.json").write_text("{not json", encoding="utf-8")
    again, fresh = store.meeting_metrics(mid, store.config())
    assert fresh and again == good


def test_half_registered_folder_ignored(store):
    (store.root / "meetings" / "abcdefgh").mkdir()
    assert store.meeting_ids() == []


def test_concurrent_registration(store):
    out, errors = [], []

    def work():
        try:
            for _ in range(10):
                out.append(store.register_meeting("2024-02-01", "x"))
        except Exception as exc:  # pragma: no cover
            errors.append(exc)

    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    assert len(set(out)) == 40 == len(store.meeting_ids())


def test_no_temp_files_left(store):
    mid = store.register_meeting("2024-02-01", "FR101")
    store.attach_transcript(mid, TWO_SPEAKERS)
    store.meeting_metrics(mid, store.config())
    assert not [p for p in store.root.rglob("*.tmp")]
