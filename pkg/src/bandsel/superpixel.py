"""SLIC superpixel segmentation of a 3-plane false-color image.

Original fixed-compactness SLIC: k-means in (color, position) space with
grid-initialized centers, followed by connectivity enforcement so that every
output segment is a single 4-connected component and ids are contiguous.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from skimage.measure import label as _connected_components

DEFAULT_COMPACTNESS = 10.0
DEFAULT_ITERATIONS = 10
# Default target density: one superpixel per ~700 px.
DEFAULT_PIXELS_PER_SEGMENT = 700


class SuperpixelError(Exception):
    pass


@dataclass(frozen=True)
class LabelMap:
    """Segment id per pixel; ids are the contiguous range [0, segment_count)."""

    labels: np.ndarray  # (H, W) int32
    segment_count: int

    def __post_init__(self):
        if self.labels.ndim != 2:
            raise SuperpixelError("labels must be a 2-D array")


def default_target_segments(width: int, height: int) -> int:
    return max(1, round(width * height / DEFAULT_PIXELS_PER_SEGMENT))


def _grid_centers(height: int, width: int, target: int) -> np.ndarray:
    # nx * ny tracks the target while matching the aspect ratio.
    nx = max(1, round(np.sqrt(target * width / height)))
    ny = max(1, round(target / nx))
    xs = (np.arange(nx) + 0.5) * (width / nx)
    ys = (np.arange(ny) + 0.5) * (height / ny)
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    return np.stack([yy.ravel(), xx.ravel()], axis=1)


def slic(
    image: np.ndarray,
    target_segments: int,
    compactness: float = DEFAULT_COMPACTNESS,
    iterations: int = DEFAULT_ITERATIONS,
) -> LabelMap:
    """Segment a (H, W, 3) real image into ~target_segments superpixels.

    Distance between a pixel and a center is
    sqrt(d_color^2 + (d_xy / S)^2 * m^2) with S = sqrt(H*W / target_segments);
    m is the compactness. Deterministic: ties go to the lowest-index center.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3 or image.shape[2] != 3:
        raise SuperpixelError(f"expected a (H, W, 3) image, got shape {image.shape}")
    height, width = image.shape[:2]
    n_px = height * width
    if target_segments < 1:
        raise SuperpixelError(f"target_segments must be >= 1, got {target_segments}")
    if target_segments > n_px:
        raise SuperpixelError(
            f"target_segments {target_segments} exceeds pixel count {n_px}"
        )
    if compactness <= 0:
        raise SuperpixelError(f"compactness must be > 0, got {compactness}")
    if iterations < 1:
        raise SuperpixelError(f"iterations must be >= 1, got {iterations}")

    spacing = float(np.sqrt(n_px / target_segments))
    positions = _grid_centers(height, width, target_segments)
    iy = np.clip(np.round(positions[:, 0]).astype(int), 0, height - 1)
    ix = np.clip(np.round(positions[:, 1]).astype(int), 0, width - 1)
    colors = image[iy, ix].copy()
    n_centers = positions.shape[0]

    m2_over_s2 = (compactness / spacing) ** 2
    yy_full, xx_full = np.mgrid[0:height, 0:width]

    labels = np.zeros((height, width), dtype=np.int32)
    for _ in range(iterations):
        best = np.full((height, width), np.inf)
        labels.fill(-1)
        half = int(np.ceil(1.5 * spacing))
        for k in range(n_centers):
            cy, cx = positions[k]
            y0 = max(0, int(cy) - half)
            y1 = min(height, int(cy) + half + 1)
            x0 = max(0, int(cx) - half)
            x1 = min(width, int(cx) + half + 1)
            patch = image[y0:y1, x0:x1]
            dc2 = ((patch - colors[k]) ** 2).sum(axis=2)
            dy = yy_full[y0:y1, x0:x1] - cy
            dx = xx_full[y0:y1, x0:x1] - cx
            d2 = dc2 + (dy * dy + dx * dx) * m2_over_s2
            win_best = best[y0:y1, x0:x1]
            improved = d2 < win_best
            win_best[improved] = d2[improved]
            labels[y0:y1, x0:x1][improved] = k

        unassigned = labels < 0
        if unassigned.any():
            uy, ux = np.nonzero(unassigned)
            pix = image[uy, ux]
            d2 = ((pix[:, None, :] - colors[None, :, :]) ** 2).sum(axis=2)
            d2 += (
                (uy[:, None] - positions[None, :, 0]) ** 2
                + (ux[:, None] - positions[None, :, 1]) ** 2
            ) * m2_over_s2
            labels[uy, ux] = np.argmin(d2, axis=1)

        flat = labels.ravel()
        counts = np.bincount(flat, minlength=n_centers).astype(np.float64)
        nonempty = counts > 0
        safe = np.maximum(counts, 1.0)
        for c in range(3):
            sums = np.bincount(flat, weights=image[:, :, c].ravel(), minlength=n_centers)
            colors[nonempty, c] = (sums / safe)[nonempty]
        ysum = np.bincount(flat, weights=yy_full.ravel(), minlength=n_centers)
        xsum = np.bincount(flat, weights=xx_full.ravel(), minlength=n_centers)
        positions[nonempty, 0] = (ysum / safe)[nonempty]
        positions[nonempty, 1] = (xsum / safe)[nonempty]

    min_size = spacing * spacing / 4.0
    return enforce_connectivity(
        LabelMap(labels=labels, segment_count=n_centers), min_size=min_size
    )


def enforce_connectivity(label_map: LabelMap, min_size: float = 0.0) -> LabelMap:
    """Split disconnected segments and merge fragments below `min_size`.

    Every 4-connected component of the input labeling becomes a candidate
    segment; components smaller than `min_size` pixels are absorbed into
    their largest adjacent component (smallest id on ties). Output ids are
    contiguous in row-major first-appearance order.
    """
    labels = label_map.labels
    comp = _connected_components(labels, connectivity=1).astype(np.int64)  # 1-based
    n_comp = int(comp.max())
    sizes = np.bincount(comp.ravel(), minlength=n_comp + 1).astype(np.int64)

    parent = np.arange(n_comp + 1)

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    if min_size > 0 and n_comp > 1:
        order = sorted(range(1, n_comp + 1), key=lambda i: (sizes[i], i))
        flat = comp.ravel()
        by_comp = np.argsort(flat, kind="stable")
        starts = np.searchsorted(flat[by_comp], np.arange(1, n_comp + 2))
        height, width = comp.shape
        for cid in order:
            root = find(cid)
            if sizes[root] >= min_size:
                continue
            idx = by_comp[starts[cid - 1]:starts[cid]]
            ys, xs = np.unravel_index(idx, comp.shape)
            neighbor_ids = set()
            for dy, dx in ((0, 1), (0, -1), (1, 0), (-1, 0)):
                ny = ys + dy
                nx = xs + dx
                ok = (ny >= 0) & (ny < height) & (nx >= 0) & (nx < width)
                for n in np.unique(comp[ny[ok], nx[ok]]):
                    r = find(int(n))
                    if r != root:
                        neighbor_ids.add(r)
            if not neighbor_ids:
                continue
            target = max(neighbor_ids, key=lambda i: (sizes[i], -i))
            parent[root] = target
            sizes[target] += sizes[root]

    resolved = np.array([find(i) for i in range(n_comp + 1)])
    merged = resolved[comp]
    # Contiguous relabel in row-major first-appearance order.
    _, first_idx, inverse = np.unique(merged.ravel(), return_index=True, return_inverse=True)
    rank = np.argsort(np.argsort(first_idx))
    out = rank[inverse].reshape(comp.shape).astype(np.int32)
    return LabelMap(labels=out, segment_count=int(out.max()) + 1)


def save_label_map(label_map: LabelMap, dir_path: str | Path, params: dict | None = None) -> None:
    """Persist as 32-bit LE raster `segments.raw` plus a JSON sidecar."""
    dir_path = Path(dir_path)
    dir_path.mkdir(parents=True, exist_ok=True)
    height, width = label_map.labels.shape
    (dir_path / "segments.raw").write_bytes(
        np.ascontiguousarray(label_map.labels, dtype="<i4").tobytes()
    )
    sidecar = {
        "width": width,
        "height": height,
        "segment_count": label_map.segment_count,
        "params": params or {},
    }
    (dir_path / "segments.json").write_text(json.dumps(sidecar, indent=2))


def load_label_map(dir_path: str | Path) -> LabelMap:
    dir_path = Path(dir_path)
    sidecar = json.loads((dir_path / "segments.json").read_text())
    labels = np.frombuffer((dir_path / "segments.raw").read_bytes(), dtype="<i4")
    labels = labels.reshape(sidecar["height"], sidecar["width"]).astype(np.int32)
    return LabelMap(labels=labels, segment_count=int(sidecar["segment_count"]))
