"""Command-line surface: corpus generation, stitching, batch runs,
selector training, adaptive routing, and evaluation reports.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import pipeline, selector, synth
from .raster import MaskConvention, load_image, load_mask, save_image, sky_fraction
from .stitch import FACE_NAMES, stitch_cube
from .techniques import ALL_NAMES, resolve_name


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage problems instead of argparse's 2
        raise UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="skymark", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="generate a synthetic corpus + manifest")
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int, default=17)
    sp.add_argument("--count-per-class", type=int, default=10)
    sp.add_argument("--val-fraction", type=float, default=0.2)

    sp = sub.add_parser("stitch", help="stitch six cube tiles into a panorama")
    sp.add_argument("--tiles-dir", required=True, help="directory with up/down/left/right/front/back.png")
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("run", help="run a technique over a manifest")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--out", required=True, help="output directory for results CSVs")
    group = sp.add_mutually_exclusive_group(required=True)
    group.add_argument("--technique")
    group.add_argument("--all", action="store_true")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--timing", action="store_true", help="record wall-clock ms (breaks byte-identical reruns)")

    sp = sub.add_parser("label", help="compute best-technique labels for a manifest")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("train", help="train the technique selector")
    sp.add_argument("--labels", required=True)
    sp.add_argument("--model", required=True)
    sp.add_argument("--seed", type=int, default=selector.TRAIN_SEED)

    sp = sub.add_parser("adaptive", help="run selector-routed masking over a manifest")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--model", required=True)
    sp.add_argument("--out", required=True, help="results CSV path")

    sp = sub.add_parser("eval", help="aggregate results CSVs into metric blocks")
    sp.add_argument("--results", required=True, nargs="+")
    sp.add_argument("--manifest", help="used to group rows by source_tag")
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("report", help="print a text table for an eval CSV's inputs")
    sp.add_argument("--results", required=True, nargs="+")
    sp.add_argument("--manifest")

    return p


def _technique_or_usage(name: str) -> str:
    try:
        return resolve_name(name)
    except KeyError:
        raise UsageError(
            f"unknown technique {name!r}; valid names: {', '.join(ALL_NAMES)}"
        ) from None


def _cmd_synth(args) -> int:
    out = Path(args.out)
    counts = {cls: args.count_per_class for cls in synth.SCENE_CLASSES}
    scenes = synth.make_corpus(counts, seed=args.seed)
    rng = np.random.default_rng(args.seed)
    order = rng.permutation(len(scenes))
    n_val = int(round(args.val_fraction * len(scenes)))
    val_idx = set(order[:n_val].tolist())

    entries = []
    for i, scene in enumerate(scenes):
        paths = synth.save_scene(scene, out / "scenes", f"scene_{i:04d}")
        entries.append(
            pipeline.ManifestEntry(
                image_path=paths["image_path"],
                mask_path=paths["mask_path"],
                mask_convention="white",
                split="validation" if i in val_idx else "train",
                source_tag=scene.spec.scene_class,
            )
        )
    pipeline.save_manifest(entries, out / "manifest.jsonl")
    print(f"wrote {len(entries)} scenes and {out / 'manifest.jsonl'}")
    return 0


def _cmd_stitch(args) -> int:
    tiles = {}
    for name in FACE_NAMES:
        path = Path(args.tiles_dir) / f"{name}.png"
        if not path.exists():
            raise DataError(f"missing tile {path}")
        tiles[name] = load_image(path)
    try:
        pano = stitch_cube(tiles)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    save_image(pano, args.out)
    print(f"wrote {args.out}")
    return 0


def _load_manifest(path) -> list:
    try:
        return pipeline.load_manifest(path)
    except (OSError, ValueError) as exc:
        raise DataError(str(exc)) from exc


def _cmd_run(args) -> int:
    entries = _load_manifest(args.manifest)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = list(ALL_NAMES) if args.all else [_technique_or_usage(args.technique)]
    for name in names:
        rows = pipeline.run_technique_batch(entries, name, workers=args.workers, timing=args.timing)
        safe = name.replace("/", "-")
        path = out / f"results_{safe}.csv"
        pipeline.save_results(rows, path)
        print(f"wrote {path} ({len(rows)} rows)")
    return 0


def _cmd_label(args) -> int:
    entries = _load_manifest(args.manifest)
    dataset = []
    for e in entries:
        try:
            img = load_image(e.image_path)
            truth = load_mask(e.mask_path, MaskConvention.from_name(e.mask_convention))
        except OSError as exc:
            raise DataError(f"{e.image_path}: {exc}") from exc
        dataset.append((img, truth))
    labeled = selector.generate_labels(dataset, workers=args.workers)
    doc = {
        "feature_spec_hash": selector.FEATURE_SPEC_HASH,
        "entries": [
            {
                "image": e.image_path,
                "split": e.split,
                "source_tag": e.source_tag,
                "features": f.tolist(),
                "label": lab,
            }
            for e, (f, lab) in zip(entries, labeled)
        ],
    }
    with open(args.out, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")
    print(f"wrote {args.out} ({len(labeled)} labels)")
    return 0


def _load_labels(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: {exc}") from exc
    if doc.get("feature_spec_hash") != selector.FEATURE_SPEC_HASH:
        raise DataError(f"{path}: labels use a different feature layout")
    return doc["entries"]


def _cmd_train(args) -> int:
    entries = _load_labels(args.labels)
    train_set = [
        (np.asarray(e["features"]), e["label"]) for e in entries if e["split"] == "train"
    ]
    if not train_set:
        raise DataError("no training-split entries in labels file")
    try:
        model = selector.train(train_set, seed=args.seed)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    selector.save_model(model, args.model)
    print(f"wrote {args.model}")
    return 0


def _cmd_adaptive(args) -> int:
    entries = _load_manifest(args.manifest)
    try:
        model = selector.load_model(args.model)
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"{args.model}: {exc}") from exc
    from . import metrics

    rows = []
    for e in entries:
        try:
            img = load_image(e.image_path)
            truth = load_mask(e.mask_path, MaskConvention.from_name(e.mask_convention))
            mask, _chosen = selector.adaptive_mask(img, model)
        except Exception as exc:
            rows.append(pipeline.ResultRow(e.image_path, "Adaptive", 0.0, 0.0, 0, 0, 0, 0, 0, str(exc)))
            continue
        conf = metrics.confusion(mask, truth)
        rows.append(
            pipeline.ResultRow(
                e.image_path,
                "Adaptive",
                sky_fraction(mask),
                sky_fraction(truth),
                conf.tp,
                conf.fp,
                conf.tn,
                conf.fn,
                0,
            )
        )
    pipeline.save_results(rows, args.out)
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


def _gather_blocks(args):
    rows = []
    for path in args.results:
        try:
            rows.extend(pipeline.load_results(path))
        except (OSError, ValueError) as exc:
            raise DataError(f"{path}: {exc}") from exc
    tag_of_image = None
    if args.manifest:
        tag_of_image = {e.image_path: e.source_tag for e in _load_manifest(args.manifest)}
    return pipeline.evaluate(rows, tag_of_image)


def _cmd_eval(args) -> int:
    blocks = _gather_blocks(args)
    with open(args.out, "w", newline="") as fh:
        pipeline.write_eval_csv(blocks, fh)
    print(f"wrote {args.out} ({len(blocks)} groups)")
    return 0


def _cmd_report(args) -> int:
    print(pipeline.format_report(_gather_blocks(args)), end="")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "stitch": _cmd_stitch,
    "run": _cmd_run,
    "label": _cmd_label,
    "train": _cmd_train,
    "adaptive": _cmd_adaptive,
    "eval": _cmd_eval,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
