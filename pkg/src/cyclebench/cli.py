"""Command-line interface.

Exit codes: 0 on success, 1 when verification or scoring finds problems,
2 for bad invocations (argparse's default).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .builder import TIERS
from .model import SceneCaption
from .pipeline import build_dataset, export_keyframes, verify_dataset
from .questions import balance_yes_no, generate_for_scene
from .scoring import (
    caption_from_scene,
    judge_answers,
    score_captioning,
    score_vqa,
)
from .serialize import (
    atomic_write_text,
    dumps_canonical,
    questions_from_jsonl,
    questions_to_jsonl,
    scene_from_dict,
)


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _load_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _cmd_gen(args) -> int:
    tiers = tuple(TIERS) if args.tier == "all" else (args.tier,)
    kwargs = {}
    if args.total is not None:
        kwargs["total_scenes"] = args.total
        kwargs["proportional"] = not args.uniform
    else:
        kwargs["scenes_per_tier"] = args.count
    result = build_dataset(args.out, args.seed, tiers=tiers, rounds=args.rounds,
                           dense_tracks=args.dense_tracks, **kwargs)
    manifest = result.manifest
    print(f"wrote {len(manifest['scenes'])} scenes, "
          f"{len(result.records)} questions, "
          f"{len(manifest['failed_seeds'])} replaced seeds -> {args.out}")
    return 0


def _cmd_questions(args) -> int:
    """Re-derive the question stream for an existing dataset."""
    from .engine import materialize

    manifest = _load_json(os.path.join(args.root, "manifest.json"))
    master_seed = manifest["master_seed"]
    records = []
    aim_state: dict = {}
    for row in manifest["scenes"]:
        scene = scene_from_dict(_load_json(
            os.path.join(args.root, "scenes", f"{row['scene_id']}.json")))
        temporal = materialize(scene)
        tier_index = list(TIERS).index(row["tier"])
        index = int(row["scene_id"].rsplit("_", 1)[1])
        qrng = np.random.Generator(np.random.Philox(np.random.SeedSequence(
            (master_seed, 5, tier_index, index))))
        records.extend(generate_for_scene(temporal, qrng,
                                          rounds=manifest["rounds"],
                                          aim_state=aim_state))
    brng = np.random.Generator(np.random.Philox(np.random.SeedSequence(
        (master_seed, 6))))
    records = balance_yes_no(records, brng,
                             tolerance=manifest["balance_tolerance"])
    from dataclasses import replace

    per_scene: dict[str, int] = {}
    assigned = []
    for record in records:
        n = per_scene.get(record.scene_id, 0)
        assigned.append(replace(record, question_id=f"{record.scene_id}_q{n}"))
        per_scene[record.scene_id] = n + 1
    _write_or_print(questions_to_jsonl(assigned), args.out)
    if args.out:
        print(f"wrote {len(assigned)} questions -> {args.out}")
    return 0


def _cmd_export_keyframes(args) -> int:
    graph = scene_from_dict(_load_json(args.scene))
    _write_or_print(dumps_canonical(export_keyframes(graph)), args.out)
    if args.out:
        print(f"wrote keyframes -> {args.out}")
    return 0


def _cmd_verify(args) -> int:
    root = os.path.dirname(os.path.abspath(args.manifest))
    report = verify_dataset(root)
    print(f"checked {report.scenes_checked} scenes, "
          f"{report.questions_checked} questions")
    for problem in report.problems:
        print(f"PROBLEM: {problem}")
    print("verification " + ("passed" if report.ok else
                             f"failed ({len(report.problems)} problems)"))
    return 0 if report.ok else 1


def _cmd_score_vqa(args) -> int:
    with open(args.questions, encoding="utf-8") as fh:
        records = questions_from_jsonl(fh.read())
    raw = _load_json(args.answers)
    judged = judge_answers(records, raw)
    report = score_vqa(records, judged)
    _write_or_print(dumps_canonical(report), args.out)
    return 0


def _cmd_score_caption(args) -> int:
    raw = _load_json(args.captions)
    reports = []
    for scene_id in sorted(raw):
        scene_path = os.path.join(args.scenes, f"{scene_id}.json")
        gt = caption_from_scene(scene_from_dict(_load_json(scene_path)))
        entry = raw[scene_id]
        pred = SceneCaption(
            scene_id=scene_id,
            objects=tuple(
                _caption_object(obj) for obj in entry.get("objects", [])))
        reports.append(score_captioning(pred, gt))
    _write_or_print(dumps_canonical({"scenes": reports}), args.out)
    return 0


def _caption_object(entry: dict):
    from .model import CaptionObject

    return CaptionObject(
        attributes={str(k): str(v) for k, v in entry.get("attributes", {}).items()},
        cycles=tuple(str(c) for c in entry.get("cycles", [])))


def _cmd_judge(args) -> int:
    from .judge import HttpTransport, RecordingTransport, ReplayTransport, judge_vqa

    with open(args.questions, encoding="utf-8") as fh:
        records = questions_from_jsonl(fh.read())
    raw = _load_json(args.answers)

    if args.mode == "replay":
        transport = ReplayTransport(args.fixtures)
    else:
        transport = HttpTransport(args.url, model=args.model,
                                  api_key=args.api_key)
        if args.fixtures:
            transport = RecordingTransport(transport, args.fixtures)

    judged = judge_vqa(records, raw, transport)
    payload = {
        j.question_id: (None if j.is_indefinite else j.value.to_json())
        for j in judged
    }
    _write_or_print(dumps_canonical(payload), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cyclebench",
        description="Cyclical-scene benchmark: generate, verify, and score.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a dataset")
    gen.add_argument("--tier", default="all", choices=list(TIERS) + ["all"])
    gen.add_argument("--count", type=int, default=10,
                     help="scenes per tier (ignored with --total)")
    gen.add_argument("--total", type=int, default=None,
                     help="total scenes, allocated across tiers")
    gen.add_argument("--uniform", action="store_true",
                     help="with --total, split evenly instead of proportionally")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--rounds", type=int, default=1)
    gen.add_argument("--out", required=True)
    gen.add_argument("--dense-tracks", action="store_true",
                     help="embed per-frame tracks in scene files")
    gen.set_defaults(func=_cmd_gen)

    questions = sub.add_parser(
        "questions", help="re-derive questions for an existing dataset")
    questions.add_argument("--root", required=True, help="dataset directory")
    questions.add_argument("--out", default=None)
    questions.set_defaults(func=_cmd_questions)

    kf = sub.add_parser("export-keyframes",
                        help="collapse one scene into animation keyframes")
    kf.add_argument("--scene", required=True)
    kf.add_argument("--out", default=None)
    kf.set_defaults(func=_cmd_export_keyframes)

    verify = sub.add_parser("verify", help="re-check a dataset end to end")
    verify.add_argument("--manifest", required=True)
    verify.set_defaults(func=_cmd_verify)

    score = sub.add_parser("score", help="score model outputs")
    score_sub = score.add_subparsers(dest="task", required=True)
    vqa = score_sub.add_parser("vqa")
    vqa.add_argument("--questions", required=True)
    vqa.add_argument("--answers", required=True,
                     help="JSON mapping question_id to a raw answer")
    vqa.add_argument("--out", default=None)
    vqa.set_defaults(func=_cmd_score_vqa)
    caption = score_sub.add_parser("caption")
    caption.add_argument("--captions", required=True,
                         help="JSON mapping scene_id to structured captions")
    caption.add_argument("--scenes", required=True, help="scene JSON directory")
    caption.add_argument("--out", default=None)
    caption.set_defaults(func=_cmd_score_caption)

    judge = sub.add_parser("judge",
                           help="convert free-form answers via a judge")
    judge.add_argument("--mode", choices=("replay", "http"), required=True)
    judge.add_argument("--questions", required=True)
    judge.add_argument("--answers", required=True,
                       help="JSON mapping question_id to free-form text")
    judge.add_argument("--fixtures", default=None,
                       help="fixture directory (replay source / http recording)")
    judge.add_argument("--url", default=None)
    judge.add_argument("--model", default="judge-v1")
    judge.add_argument("--api-key", default=None)
    judge.add_argument("--out", default=None)
    judge.set_defaults(func=_cmd_judge)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "judge":
        if args.mode == "replay" and not args.fixtures:
            parser.error("--mode replay requires --fixtures")
        if args.mode == "http" and not args.url:
            parser.error("--mode http requires --url")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
