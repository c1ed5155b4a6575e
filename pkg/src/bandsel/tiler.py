"""Cut band-composition scenes into train/test tile datasets with augmentation.

Windows are tile_size x tile_size at a fixed stride, fully inside the scene
(no padding; remainders are discarded so the window count follows the closed
form floor((W - tile) / stride) + 1 per axis). Train tiles may be augmented
with the 8 dihedral transforms of the square; test tiles never are.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .raster import Scene, render_composition, write_scene, BandPlane

AUGMENT_NONE = "none"
AUGMENT_ROT4 = "rot4"  # rotations only
AUGMENT_D8 = "d8"      # rotations + reflections

_TRANSFORM_IDS = {AUGMENT_NONE: (0,), AUGMENT_ROT4: (0, 1, 2, 3), AUGMENT_D8: tuple(range(8))}


class TilerError(Exception):
    pass


@dataclass(frozen=True)
class TileSpec:
    tile_size: int = 256
    stride: int = 64
    augment: str = AUGMENT_D8

    def __post_init__(self):
        if self.tile_size <= 0 or self.stride <= 0:
            raise TilerError("tile_size and stride must be positive")
        if self.stride > self.tile_size:
            raise TilerError("stride must not exceed tile_size")
        if self.augment not in _TRANSFORM_IDS:
            raise TilerError(
                f"augment must be one of {sorted(_TRANSFORM_IDS)}, got {self.augment!r}"
            )


@dataclass(frozen=True)
class TileEntry:
    scene_id: str
    x: int
    y: int
    transform: int
    split: str
    image: str
    mask: str


@dataclass(frozen=True)
class TileSet:
    entries: tuple[TileEntry, ...]
    root: Path

    def split_entries(self, split: str) -> list[TileEntry]:
        return [e for e in self.entries if e.split == split]


def grid_windows(width: int, height: int, spec: TileSpec) -> list[tuple[int, int]]:
    """(x, y) window origins in row-major order; errors on undersized scenes."""
    if width < spec.tile_size or height < spec.tile_size:
        raise TilerError(
            f"scene {width}x{height} smaller than tile size {spec.tile_size}"
        )
    xs = range(0, width - spec.tile_size + 1, spec.stride)
    ys = range(0, height - spec.tile_size + 1, spec.stride)
    return [(x, y) for y in ys for x in xs]


def apply_d8(a: np.ndarray, transform: int) -> np.ndarray:
    """One of the 8 square symmetries: 0=identity, 1-3 rotations, 4-7 reflections."""
    if a.shape[0] != a.shape[1]:
        raise TilerError(f"d8 transforms need a square tile, got {a.shape[:2]}")
    if not 0 <= transform <= 7:
        raise TilerError(f"transform id must be in 0..7, got {transform}")
    if transform < 4:
        return np.rot90(a, k=transform)
    return np.rot90(np.fliplr(a), k=transform - 4)


def invert_d8(transform: int) -> int:
    """The transform id that undoes `transform`."""
    if transform < 4:
        return (-transform) % 4
    return transform  # reflections are involutions


def augment_d8(tile_image: np.ndarray, tile_mask: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """All 8 dihedral (image, mask) pairs, transform ids 0..7 in order."""
    return [(apply_d8(tile_image, t), apply_d8(tile_mask, t)) for t in range(8)]


def _write_tile(img: np.ndarray, path: Path) -> None:
    mode = "RGB" if img.ndim == 3 else "L"
    Image.fromarray(np.ascontiguousarray(img), mode=mode).save(path, format="PNG", compress_level=1)


def build_dataset(
    scenes: list[Scene],
    composition: list[int],
    split_plan: dict[str, str],
    spec: TileSpec,
    out_dir: str | Path,
) -> TileSet:
    """Render every scene from `composition`, cut windows, and write the tiles.

    split_plan maps scene_id -> "train" | "test". Train tiles are augmented
    per spec.augment; test tiles always get transform 0 only. Missing bands
    are rejected before any file is written. An index.csv is emitted with
    columns scene_id,x,y,transform,split,image,mask.
    """
    out_dir = Path(out_dir)
    composition = list(composition)
    for scene in scenes:
        for b in composition:
            if not 1 <= b <= scene.n_bands:
                raise TilerError(
                    f"band {b} missing in scene {scene.id!r} (has 1..{scene.n_bands})"
                )
        if scene.id not in split_plan:
            raise TilerError(f"scene {scene.id!r} missing from split plan")
        if split_plan[scene.id] not in ("train", "test"):
            raise TilerError(
                f"split for scene {scene.id!r} must be train or test, "
                f"got {split_plan[scene.id]!r}"
            )

    if len(composition) != 3:
        return build_raw_dataset(scenes, composition, split_plan, spec, out_dir)

    entries: list[TileEntry] = []
    for split in ("train", "test"):
        (out_dir / split).mkdir(parents=True, exist_ok=True)
    for scene in scenes:
        split = split_plan[scene.id]
        transforms = _TRANSFORM_IDS[spec.augment] if split == "train" else (0,)
        rendered = _render(scene, composition)
        for x, y in grid_windows(scene.width, scene.height, spec):
            img_tile = rendered[y:y + spec.tile_size, x:x + spec.tile_size]
            mask_tile = scene.mask[y:y + spec.tile_size, x:x + spec.tile_size]
            for t in transforms:
                stem = f"{scene.id}_{x}_{y}_t{t}"
                img_path = out_dir / split / f"{stem}.png"
                mask_path = out_dir / split / f"{stem}_mask.png"
                _write_tile(apply_d8(img_tile, t), img_path)
                _write_tile(apply_d8(mask_tile, t), mask_path)
                entries.append(
                    TileEntry(
                        scene_id=scene.id,
                        x=x,
                        y=y,
                        transform=t,
                        split=split,
                        image=str(img_path.relative_to(out_dir)),
                        mask=str(mask_path.relative_to(out_dir)),
                    )
                )
    _write_index(entries, out_dir / "index.csv")
    return TileSet(entries=tuple(entries), root=out_dir)


def _render(scene: Scene, composition: list[int]) -> np.ndarray:
    return render_composition(scene, composition)


def build_raw_dataset(
    scenes: list[Scene],
    composition: list[int],
    split_plan: dict[str, str],
    spec: TileSpec,
    out_dir: str | Path,
) -> TileSet:
    """Variant for non-3-band compositions: 16-bit raw tiles + header files.

    Each tile becomes a scene-format directory (band_<i>.raw + mask.raw) so
    any band count survives losslessly.
    """
    out_dir = Path(out_dir)
    for scene in scenes:
        for b in composition:
            if not 1 <= b <= scene.n_bands:
                raise TilerError(
                    f"band {b} missing in scene {scene.id!r} (has 1..{scene.n_bands})"
                )
    entries: list[TileEntry] = []
    for scene in scenes:
        split = split_plan[scene.id]
        transforms = _TRANSFORM_IDS[spec.augment] if split == "train" else (0,)
        planes = [scene.band(b) for b in composition]
        for x, y in grid_windows(scene.width, scene.height, spec):
            for t in transforms:
                stem = f"{scene.id}_{x}_{y}_t{t}"
                tile_dir = out_dir / split / stem
                bands = tuple(
                    BandPlane(
                        index=i + 1,
                        samples=np.ascontiguousarray(
                            apply_d8(p[y:y + spec.tile_size, x:x + spec.tile_size], t)
                        ),
                    )
                    for i, p in enumerate(planes)
                )
                tile_scene = Scene(
                    id=stem,
                    width=spec.tile_size,
                    height=spec.tile_size,
                    bands=bands,
                    mask=np.ascontiguousarray(
                        apply_d8(scene.mask[y:y + spec.tile_size, x:x + spec.tile_size], t)
                    ),
                )
                write_scene(tile_scene, tile_dir)
                entries.append(
                    TileEntry(
                        scene_id=scene.id,
                        x=x,
                        y=y,
                        transform=t,
                        split=split,
                        image=str(tile_dir.relative_to(out_dir)),
                        mask=str((tile_dir / "mask.raw").relative_to(out_dir)),
                    )
                )
    _write_index(entries, out_dir / "index.csv")
    return TileSet(entries=tuple(entries), root=out_dir)


def _write_index(entries: list[TileEntry], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["scene_id", "x", "y", "transform", "split", "image", "mask"])
        for e in entries:
            writer.writerow([e.scene_id, e.x, e.y, e.transform, e.split, e.image, e.mask])
