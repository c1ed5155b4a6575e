"""Segment table: per-superpixel labels, quality filters, train/val/test split.

A segment's label is the majority ground-truth class of its pixels
(nodata excluded; ties go to non-forest). Segments are excluded when their
homogeneity rate is below 0.70 or their area below 70 px; both bounds are
inclusive keeps.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .raster import MASK_FOREST, MASK_NODATA, MASK_NONFOREST, Scene
from .superpixel import LabelMap

LABEL_FOREST = "forest"
LABEL_NONFOREST = "non-forest"

SPLIT_TRAIN = "train"
SPLIT_VAL = "val"
SPLIT_TEST = "test"
SPLIT_EXCLUDED = "excluded"

MIN_HOMOGENEITY = 0.70
MIN_AREA = 70
DEFAULT_FRACTIONS = (0.70, 0.15, 0.15)

CSV_FIELDS = ("segment_id", "scene_id", "area", "homogeneity", "label", "split")


class SegmentError(Exception):
    pass


class StratificationError(SegmentError):
    """A class has too few kept segments to populate all three splits."""


@dataclass(frozen=True)
class SegmentRecord:
    segment_id: int
    scene_id: str
    area: int
    bbox: tuple[int, int, int, int]  # (x0, y0, x1, y1), exclusive upper bounds
    homogeneity: float
    label: str
    split: str | None = None


def build_segment_table(scene: Scene, label_map: LabelMap) -> list[SegmentRecord]:
    """One record per segment id, in id order.

    Homogeneity counts only non-nodata pixels; a segment that is 100% nodata
    is marked excluded immediately.
    """
    labels = label_map.labels
    if labels.shape != scene.mask.shape:
        raise SegmentError(
            f"label map shape {labels.shape} does not match scene "
            f"{scene.mask.shape}"
        )
    n = label_map.segment_count
    flat = labels.ravel()
    mask = scene.mask.ravel()
    area = np.bincount(flat, minlength=n)
    forest = np.bincount(flat[mask == MASK_FOREST], minlength=n)
    nonforest = np.bincount(flat[mask == MASK_NONFOREST], minlength=n)

    yy, xx = np.mgrid[0:labels.shape[0], 0:labels.shape[1]]
    x0 = np.full(n, np.iinfo(np.int64).max)
    y0 = np.full(n, np.iinfo(np.int64).max)
    x1 = np.zeros(n, dtype=np.int64)
    y1 = np.zeros(n, dtype=np.int64)
    np.minimum.at(x0, flat, xx.ravel())
    np.minimum.at(y0, flat, yy.ravel())
    np.maximum.at(x1, flat, xx.ravel())
    np.maximum.at(y1, flat, yy.ravel())

    records = []
    for sid in range(n):
        valid = forest[sid] + nonforest[sid]
        if valid == 0:
            records.append(
                SegmentRecord(
                    segment_id=sid,
                    scene_id=scene.id,
                    area=int(area[sid]),
                    bbox=(int(x0[sid]), int(y0[sid]), int(x1[sid]) + 1, int(y1[sid]) + 1),
                    homogeneity=0.0,
                    label=LABEL_NONFOREST,
                    split=SPLIT_EXCLUDED,
                )
            )
            continue
        # Tie goes to non-forest (always below the homogeneity threshold anyway).
        if nonforest[sid] >= forest[sid]:
            majority, label = nonforest[sid], LABEL_NONFOREST
        else:
            majority, label = forest[sid], LABEL_FOREST
        records.append(
            SegmentRecord(
                segment_id=sid,
                scene_id=scene.id,
                area=int(area[sid]),
                bbox=(int(x0[sid]), int(y0[sid]), int(x1[sid]) + 1, int(y1[sid]) + 1),
                homogeneity=float(majority) / float(valid),
                label=label,
            )
        )
    return records


def filter_segments(
    records: list[SegmentRecord],
    min_homogeneity: float = MIN_HOMOGENEITY,
    min_area: int = MIN_AREA,
) -> list[SegmentRecord]:
    """Mark split=excluded on records failing either quality criterion.

    Boundary values are kept: homogeneity == min_homogeneity and
    area == min_area both pass.
    """
    out = []
    for r in records:
        if r.split == SPLIT_EXCLUDED or r.homogeneity < min_homogeneity or r.area < min_area:
            out.append(replace(r, split=SPLIT_EXCLUDED))
        else:
            out.append(r)
    return out


def split_segments(
    records: list[SegmentRecord],
    fractions: tuple[float, float, float] = DEFAULT_FRACTIONS,
    seed: int = 42,
) -> list[SegmentRecord]:
    """Stratified random train/val/test assignment of non-excluded records.

    Each class is split independently at the given fractions; train and val
    get the floor of their share, test gets the remainder. Deterministic for
    a fixed seed (forest drawn first, then non-forest).
    """
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise SegmentError(f"fractions must sum to 1, got {fractions}")
    rng = np.random.default_rng(seed)
    out = list(records)
    kept_idx = [i for i, r in enumerate(records) if r.split != SPLIT_EXCLUDED]
    any_val_test = fractions[1] > 0 or fractions[2] > 0
    for cls in (LABEL_FOREST, LABEL_NONFOREST):
        cls_idx = [i for i in kept_idx if records[i].label == cls]
        if len(cls_idx) < 3 and any_val_test:
            raise StratificationError(
                f"class {cls!r} has only {len(cls_idx)} kept segments; need >= 3"
            )
        if not cls_idx:
            continue
        perm = rng.permutation(len(cls_idx))
        n_train = int(np.floor(fractions[0] * len(cls_idx)))
        n_val = int(np.floor(fractions[1] * len(cls_idx)))
        for pos, p in enumerate(perm):
            i = cls_idx[p]
            if pos < n_train:
                split = SPLIT_TRAIN
            elif pos < n_train + n_val:
                split = SPLIT_VAL
            else:
                split = SPLIT_TEST
            out[i] = replace(out[i], split=split)
    return out


def write_segment_csv(records: list[SegmentRecord], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_FIELDS)
        for r in records:
            writer.writerow(
                [r.segment_id, r.scene_id, r.area, repr(r.homogeneity), r.label, r.split or ""]
            )


def read_segment_csv(path: str | Path) -> list[SegmentRecord]:
    records = []
    with Path(path).open(newline="") as f:
        for row in csv.DictReader(f):
            records.append(
                SegmentRecord(
                    segment_id=int(row["segment_id"]),
                    scene_id=row["scene_id"],
                    area=int(row["area"]),
                    bbox=(0, 0, 0, 0),  # bbox is not persisted
                    homogeneity=float(row["homogeneity"]),
                    label=row["label"],
                    split=row["split"] or None,
                )
            )
    return records
