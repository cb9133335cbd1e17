"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 transcript parse failure, 3 data or
corpus error. Diagnostics go to stderr; documents go to stdout or ``--out``.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

from . import canonical
from .longitudinal import NoSlopes, UnknownStudent, student_trend
from .metrics import Config
from .report import (
    cohort_csv,
    cohort_report,
    emit_meeting_json,
    meeting_csv,
    speaker_csv,
    trend_report,
)
from .report.html import emit_cohort_html, emit_meeting_html
from .simulator import (
    GENERATOR,
    InvalidParams,
    SimParams,
    meeting_to_cues,
    simulate_meeting,
    sweep,
)
from .store import AUTO_CREATE, REJECT_UNKNOWN, CorpusStore, StoreError, open_store
from .volatility import Segment
from .vtt import TranscriptError, serialize_transcript

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_DATA = 0, 1, 2, 3

log = logging.getLogger("convovol")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _store(args) -> CorpusStore:
    return open_store(args.root)


def _config(args, store: CorpusStore) -> Config:
    return store.config(
        gap_threshold=args.gap_threshold,
        stddev_mode=args.stddev_mode,
        split_rule=args.split_rule,
        corpus_root=str(store.root),
    )


def _format(args, config: Config) -> str:
    return args.format or config.output_format


def cmd_init(args) -> int:
    store = CorpusStore.init(args.path)
    print(f"initialized corpus at {store.root}", file=sys.stderr)
    return EXIT_OK


def cmd_register(args) -> int:
    store = _store(args)
    meeting_id = store.register_meeting(args.date, args.course, split_point=args.split_point,
                                        video_link=args.video_link, seed=args.seed)
    print(meeting_id)
    return EXIT_OK


def cmd_attach(args) -> int:
    store = _store(args)
    try:
        document = Path(args.file).read_bytes().decode("utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error: cannot read {args.file}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    report = store.attach_transcript(args.meeting_id, document)
    for line, message in report.warnings:
        print(f"warning: {args.file}:{line}: {message}", file=sys.stderr)
    print(f"attached {len(report.cues)} cues to {args.meeting_id}", file=sys.stderr)
    return EXIT_OK


def cmd_student(args) -> int:
    store = _store(args)
    if args.action == "add":
        if not args.student_id:
            raise UsageError("student add needs a STUDENT_ID")
        store.add_student(args.student_id, args.alias or ())
    elif args.action == "policy":
        if args.student_id not in (AUTO_CREATE, REJECT_UNKNOWN):
            raise UsageError(f"policy must be {AUTO_CREATE} or {REJECT_UNKNOWN}")
        store.set_alias_policy(args.student_id)
    else:
        for student in store.students():
            print(student)
    return EXIT_OK


def cmd_analyze(args) -> int:
    store = _store(args)
    config = _config(args, store)
    metrics, _ = store.meeting_metrics(args.meeting_id, config)
    fmt = _format(args, config)
    if fmt == "json":
        text = emit_meeting_json(metrics)
    elif fmt == "csv":
        text = speaker_csv([metrics]) + "\n" + meeting_csv([metrics])
    else:
        text = emit_meeting_html(store.load_meeting(args.meeting_id, config), metrics)
    _emit(text, args.out)
    return EXIT_OK


def _load(args):
    store = _store(args)
    loaded = store.load_corpus(_config(args, store))
    for meeting_id, message in loaded.failures.items():
        print(f"warning: meeting {meeting_id} skipped: {message}", file=sys.stderr)
    return store, loaded


def cmd_cohort(args) -> int:
    _, loaded = _load(args)
    fmt = _format(args, loaded.corpus.config)
    if fmt == "csv":
        text = cohort_csv(loaded.corpus, args.segment)
    elif fmt == "html":
        text = emit_cohort_html(loaded.corpus, args.segment)
    else:
        doc = cohort_report(loaded.corpus, args.segment)
        doc["failures"] = dict(loaded.failures)
        doc["pending"] = list(loaded.pending)
        text = canonical.dumps(doc)
    _emit(text, args.out)
    return EXIT_OK


def cmd_trend(args) -> int:
    _, loaded = _load(args)
    trend = student_trend(loaded.corpus, args.student_id, args.segment)
    _emit(canonical.dumps(trend_report(trend, loaded.corpus.config.describe())), args.out)
    return EXIT_OK


def cmd_report(args) -> int:
    if bool(args.meeting_id) == bool(args.cohort):
        raise UsageError("give either a MEETING_ID or --cohort")
    if args.cohort:
        _, loaded = _load(args)
        text = emit_cohort_html(loaded.corpus, args.segment)
    else:
        store = _store(args)
        config = _config(args, store)
        metrics, _ = store.meeting_metrics(args.meeting_id, config)
        text = emit_meeting_html(store.load_meeting(args.meeting_id, config), metrics)
    _emit(text, args.out)
    return EXIT_OK


def _betas(values: list[str]) -> list[float]:
    try:
        return [float(v) for item in values for v in item.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--beta expects numbers, got {values!r}") from None


def cmd_simulate(args) -> int:
    params = SimParams(
        n_speakers=args.speakers,
        target_duration=args.duration,
        long_turn_range=tuple(args.long_turn),
        backchannel_range=tuple(args.backchannel),
        inter_turn_gap_range=tuple(args.gap),
        self_transition_prob=args.self_transition,
        seed=args.seed,
    )
    betas = _betas(args.beta)
    rows = sweep(params, betas, args.runs)
    if args.emit_vtt:
        folder = Path(args.emit_vtt)
        folder.mkdir(parents=True, exist_ok=True)
        for beta in betas:
            for i in range(args.runs):
                p = dataclasses.replace(params, backchannel_rate=beta, seed=params.seed + i)
                meeting = simulate_meeting(p, meeting_id=f"sim-{beta:.2f}-{i:03d}")
                name = f"beta-{beta:.2f}_run-{i:03d}.vtt"
                (folder / name).write_text(serialize_transcript(meeting_to_cues(meeting)), encoding="utf-8")
    doc = {
        "schema_version": canonical.SCHEMA_VERSION,
        "generator": GENERATOR,
        "params": {
            "n_speakers": params.n_speakers,
            "target_duration": params.target_duration,
            "long_turn_range": list(params.long_turn_range),
            "backchannel_range": list(params.backchannel_range),
            "inter_turn_gap_range": list(params.inter_turn_gap_range),
            "self_transition_prob": params.self_transition_prob,
            "seed": params.seed,
        },
        "rows": [{"beta": r.beta, "mean_mcv": r.mean_mcv, "mean_icv": r.mean_icv, "n_runs": r.n_runs} for r in rows],
    }
    _emit(canonical.dumps(doc), args.out)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    store = _store(args)
    overrides = {k: getattr(args, k) for k in ("gap_threshold", "stddev_mode", "split_rule")}
    app = create_app(store.root, store.config(**overrides))
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--root", default=os.environ.get("CONVO_CORPUS"),
                        help="corpus root (default: $CONVO_CORPUS)")
    analysis = argparse.ArgumentParser(add_help=False)
    analysis.add_argument("--gap-threshold", type=float, help="max pause in seconds merged into one utterance")
    analysis.add_argument("--stddev-mode", choices=("sample", "population"))
    analysis.add_argument("--split-rule", choices=("midpoint", "explicit"))
    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--out", help="write the document here instead of stdout")

    def segment(value: str) -> Segment:
        try:
            return Segment.parse(value)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    parser = _Parser(prog="convovol", description="Conversational volatility analytics for meeting transcripts.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("init", help="create a corpus layout")
    p.add_argument("path")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("register", parents=[common], help="register a meeting and print its code")
    p.add_argument("--date", required=True, help="ISO date, e.g. 2022-02-14")
    p.add_argument("--course", required=True)
    p.add_argument("--split-point", type=float, help="language switch time in seconds")
    p.add_argument("--video-link")
    p.add_argument("--seed", type=int, help="seed the meeting-code generator")
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("attach", parents=[common], help="ingest a VTT transcript for a meeting")
    p.add_argument("meeting_id")
    p.add_argument("file")
    p.set_defaults(func=cmd_attach)

    p = sub.add_parser("student", parents=[common], help="manage tracked students and name aliases")
    p.add_argument("action", choices=("add", "list", "policy"))
    p.add_argument("student_id", nargs="?", help="student id (or policy name for 'policy')")
    p.add_argument("--alias", action="append", help="display name mapping to this student (repeatable)")
    p.set_defaults(func=cmd_student)

    p = sub.add_parser("analyze", parents=[common, analysis, output], help="metrics for one meeting")
    p.add_argument("meeting_id")
    p.add_argument("--format", choices=("json", "csv", "html"))
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("cohort", parents=[common, analysis, output], help="cohort aggregates")
    p.add_argument("--segment", type=segment, default=Segment.WHOLE, help="whole, h1 or h2")
    p.add_argument("--format", choices=("json", "csv", "html"))
    p.set_defaults(func=cmd_cohort)

    p = sub.add_parser("trend", parents=[common, analysis, output], help="i-CV trend for one student")
    p.add_argument("student_id")
    p.add_argument("--segment", type=segment, default=Segment.WHOLE, help="whole, h1 or h2")
    p.set_defaults(func=cmd_trend)

    p = sub.add_parser("simulate", parents=[output], help="simulate meetings over backchannel rates")
    p.add_argument("--beta", action="append", required=True, help="backchannel rate(s); repeat or comma-separate")
    p.add_argument("--runs", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--speakers", type=int, default=3)
    p.add_argument("--duration", type=float, default=600.0, help="target meeting length in seconds")
    p.add_argument("--long-turn", type=float, nargs=2, default=(4.0, 8.0), metavar=("MIN", "MAX"))
    p.add_argument("--backchannel", type=float, nargs=2, default=(0.3, 1.0), metavar=("MIN", "MAX"))
    p.add_argument("--gap", type=float, nargs=2, default=(0.2, 1.0), metavar=("MIN", "MAX"))
    p.add_argument("--self-transition", type=float, default=0.0)
    p.add_argument("--emit-vtt", metavar="DIR", help="also write every simulated meeting as a VTT file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", parents=[common, analysis, output], help="static HTML report")
    p.add_argument("meeting_id", nargs="?")
    p.add_argument("--cohort", action="store_true")
    p.add_argument("--segment", type=segment, default=Segment.WHOLE, help="cohort ordinal segment")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", parents=[common, analysis], help="run the HTTP API")
    p.add_argument("--host", default=os.environ.get("CONVO_HOST", "127.0.0.1"))
    p.add_argument("--port", type=int, default=int(os.environ.get("CONVO_PORT", "8000")))
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TranscriptError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        for line, message in exc.warnings:
            print(f"  line {line}: {message}", file=sys.stderr)
        return EXIT_PARSE
    except (StoreError, UnknownStudent, NoSlopes, InvalidParams, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
