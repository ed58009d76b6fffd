"""Dataset manifests, batch technique runs, results persistence, and
evaluation report assembly.

Manifests are JSON-lines files; results are CSV with a fixed header so
downstream tooling (and the determinism acceptance check) can diff them
byte-for-byte.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import metrics
from .raster import MaskConvention, load_image, load_mask, sky_fraction
from .techniques import resolve_name, run_technique

log = logging.getLogger(__name__)

RESULTS_HEADER = ("image", "technique", "pred_frac", "obs_frac", "tp", "fp", "tn", "fn", "ms", "error")

VALID_SPLITS = ("train", "validation")


@dataclass(frozen=True)
class ManifestEntry:
    image_path: str
    mask_path: str
    mask_convention: str
    split: str
    source_tag: str

    def __post_init__(self):
        if not self.image_path or not self.mask_path:
            raise ValueError("manifest entry paths must be non-empty")
        if self.split not in VALID_SPLITS:
            raise ValueError(f"split must be one of {VALID_SPLITS}, got {self.split!r}")
        MaskConvention.from_name(self.mask_convention)


@dataclass(frozen=True)
class ResultRow:
    image: str
    technique: str
    pred_frac: float
    obs_frac: float
    tp: int
    fp: int
    tn: int
    fn: int
    ms: int
    error: str = ""


def load_manifest(path) -> list[ManifestEntry]:
    entries = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
                entries.append(ManifestEntry(**doc))
            except (json.JSONDecodeError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad manifest entry: {exc}") from exc
    return entries


def save_manifest(entries, path) -> None:
    with open(path, "w") as fh:
        for e in entries:
            fh.write(json.dumps(e.__dict__) + "\n")


def _process_entry(entry: ManifestEntry, technique: str, timing: bool) -> ResultRow:
    t0 = time.perf_counter()
    try:
        img = load_image(entry.image_path)
        truth = load_mask(entry.mask_path, MaskConvention.from_name(entry.mask_convention))
        if truth.shape != img.shape[:2]:
            raise ValueError("image and mask dimensions differ")
        pred = run_technique(technique, img)
    except Exception as exc:
        return ResultRow(entry.image_path, technique, 0.0, 0.0, 0, 0, 0, 0, 0, str(exc))
    conf = metrics.confusion(pred, truth)
    ms = int(round((time.perf_counter() - t0) * 1000.0)) if timing else 0
    return ResultRow(
        entry.image_path,
        technique,
        sky_fraction(pred),
        sky_fraction(truth),
        conf.tp,
        conf.fp,
        conf.tn,
        conf.fn,
        ms,
    )


def run_technique_batch(
    entries, technique: str, workers: int = 1, timing: bool = False
) -> list[ResultRow]:
    """One ResultRow per manifest entry, in manifest order; unreadable
    files yield error-flagged rows and the run continues."""
    technique = resolve_name(technique)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda e: _process_entry(e, technique, timing), entries))
    return [_process_entry(e, technique, timing) for e in entries]


def write_results(rows, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(RESULTS_HEADER)
    for r in rows:
        writer.writerow(
            [
                r.image,
                r.technique,
                f"{r.pred_frac:.6f}",
                f"{r.obs_frac:.6f}",
                r.tp,
                r.fp,
                r.tn,
                r.fn,
                r.ms,
                r.error,
            ]
        )


def save_results(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        write_results(rows, fh)


def load_results(path) -> list[ResultRow]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != list(RESULTS_HEADER):
            raise ValueError(f"unexpected results header in {path}")
        for rec in reader:
            rows.append(
                ResultRow(
                    rec["image"],
                    rec["technique"],
                    float(rec["pred_frac"]),
                    float(rec["obs_frac"]),
                    int(rec["tp"]),
                    int(rec["fp"]),
                    int(rec["tn"]),
                    int(rec["fn"]),
                    int(rec["ms"]),
                    rec["error"],
                )
            )
    return rows


@dataclass(frozen=True)
class EvalBlock:
    technique: str
    source_tag: str
    n: int
    stats: metrics.SeriesStats
    precision: float
    recall: float
    f1: float


def evaluate(rows, tag_of_image=None) -> list[EvalBlock]:
    """Sky-fraction series stats plus macro-averaged P/R/F1 per
    (technique, source_tag) group; error rows are skipped, empty groups
    omitted with a warning."""
    groups: dict[tuple[str, str], list[ResultRow]] = {}
    for r in rows:
        tag = (tag_of_image or {}).get(r.image, "all")
        groups.setdefault((r.technique, tag), []).append(r)

    blocks = []
    for (technique, tag), members in sorted(groups.items()):
        ok = [r for r in members if not r.error]
        if not ok:
            log.warning("group (%s, %s) has no usable rows; omitted", technique, tag)
            continue
        pred = np.array([r.pred_frac for r in ok])
        obs = np.array([r.obs_frac for r in ok])
        stats = metrics.series_stats(pred, obs)
        prf = [
            metrics.prf1(metrics.Confusion(r.tp, r.fp, r.tn, r.fn))
            for r in ok
        ]
        blocks.append(
            EvalBlock(
                technique=technique,
                source_tag=tag,
                n=len(ok),
                stats=stats,
                precision=float(np.mean([p[0] for p in prf])),
                recall=float(np.mean([p[1] for p in prf])),
                f1=float(np.mean([p[2] for p in prf])),
            )
        )
    return blocks


def write_eval_csv(blocks, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["technique", "source_tag", "n", "rmse", "r2", "d", "precision", "recall", "f1"])
    for b in blocks:
        writer.writerow(
            [
                b.technique,
                b.source_tag,
                b.n,
                f"{b.stats.rmse:.6f}",
                f"{b.stats.r2:.6f}",
                f"{b.stats.d:.6f}",
                f"{b.precision:.6f}",
                f"{b.recall:.6f}",
                f"{b.f1:.6f}",
            ]
        )


def format_report(blocks) -> str:
    """Human-readable table: one line per technique/source group."""
    out = io.StringIO()
    header = f"{'technique':<16} {'source':<10} {'n':>5} {'RMSE':>8} {'R2':>7} {'d':>7} {'P':>7} {'R':>7} {'F1':>7}"
    out.write(header + "\n")
    out.write("-" * len(header) + "\n")
    for b in blocks:
        out.write(
            f"{b.technique:<16} {b.source_tag:<10} {b.n:>5} "
            f"{b.stats.rmse:>8.3f} {b.stats.r2:>7.3f} {b.stats.d:>7.3f} "
            f"{b.precision:>7.3f} {b.recall:>7.3f} {b.f1:>7.3f}\n"
        )
    return out.getvalue()
