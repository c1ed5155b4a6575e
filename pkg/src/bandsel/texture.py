"""Per-segment gray-level co-occurrence matrices and Haralick texture features.

Each segment yields, per band, 13 coefficients in each of the 4 canonical
directions at distance 1 (52 values per band), concatenated in
(band, direction, coefficient) order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .raster import Scene, quantize_band
from .segments import SegmentRecord
from .superpixel import LabelMap

DIRECTIONS = (0, 45, 90, 135)
# (dy, dx) offsets at distance 1.
_OFFSETS = {0: (0, 1), 45: (-1, 1), 90: (-1, 0), 135: (-1, -1)}
N_COEFFICIENTS = 13
FEATURES_PER_BAND = len(DIRECTIONS) * N_COEFFICIENTS  # 52
DEFAULT_LEVELS = 32


class TextureError(Exception):
    pass


@dataclass(frozen=True)
class Glcm:
    """Symmetric, normalized co-occurrence matrix for one direction.

    pair_count == 0 flags a degenerate segment (no neighbor pair fully
    inside the mask); its matrix is all zeros and its Haralick vector is
    defined as all zeros.
    """

    matrix: np.ndarray  # (levels, levels) float64
    levels: int
    direction: int
    distance: int
    pair_count: int


def glcm(
    quantized: np.ndarray,
    segment_mask: np.ndarray,
    direction: int,
    distance: int = 1,
    levels: int = DEFAULT_LEVELS,
) -> Glcm:
    """Co-occurrence matrix over pixel pairs with BOTH endpoints in the mask.

    Counts are symmetrized (C + C^T) and normalized by the total pair count.
    """
    if direction not in _OFFSETS:
        raise TextureError(f"direction must be one of {DIRECTIONS}, got {direction}")
    quantized = np.asarray(quantized)
    segment_mask = np.asarray(segment_mask, dtype=bool)
    if quantized.shape != segment_mask.shape:
        raise TextureError("quantized image and segment mask shapes differ")
    if not segment_mask.any():
        raise TextureError("empty segment mask")
    if quantized.min() < 0 or quantized.max() >= levels:
        raise TextureError("quantized values outside [0, levels)")

    if distance < 1:
        raise TextureError(f"distance must be >= 1, got {distance}")

    dy, dx = _OFFSETS[direction]
    dy, dx = dy * distance, dx * distance
    h, w = quantized.shape
    if abs(dy) >= h or abs(dx) >= w:
        # Offset exceeds the image: no pairs exist at all.
        return Glcm(
            matrix=np.zeros((levels, levels), dtype=np.float64),
            levels=levels,
            direction=direction,
            distance=distance,
            pair_count=0,
        )

    src_y = slice(max(0, -dy), min(h, h - dy))
    src_x = slice(max(0, -dx), min(w, w - dx))
    dst_y = slice(max(0, dy), min(h, h + dy))
    dst_x = slice(max(0, dx), min(w, w + dx))

    valid = segment_mask[src_y, src_x] & segment_mask[dst_y, dst_x]
    i = quantized[src_y, src_x][valid].astype(np.int64)
    j = quantized[dst_y, dst_x][valid].astype(np.int64)
    counts = np.bincount(i * levels + j, minlength=levels * levels).reshape(levels, levels)
    sym = counts + counts.T
    total = int(sym.sum())
    if total == 0:
        matrix = np.zeros((levels, levels), dtype=np.float64)
    else:
        matrix = sym.astype(np.float64) / total
    return Glcm(
        matrix=matrix,
        levels=levels,
        direction=direction,
        distance=distance,
        pair_count=total,
    )


def haralick_13(g: Glcm) -> np.ndarray:
    """The 13 classic Haralick coefficients of one normalized GLCM.

    Order: ASM, contrast, correlation, sum-of-squares variance, inverse
    difference moment, sum average, sum variance, sum entropy, entropy,
    difference variance, difference entropy, IMC1, IMC2. Natural log;
    log(0) terms contribute 0; correlation-type coefficients (3, 12, 13)
    are 0 for zero-variance matrices; a zero-pair GLCM yields all zeros.
    """
    if g.pair_count == 0:
        return np.zeros(N_COEFFICIENTS)
    p = g.matrix
    levels = g.levels
    idx = np.arange(levels, dtype=np.float64)
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    mu_x = float(idx @ px)
    mu_y = float(idx @ py)
    var_x = float(((idx - mu_x) ** 2) @ px)
    var_y = float(((idx - mu_y) ** 2) @ py)
    ii, jj = np.meshgrid(idx, idx, indexing="ij")

    f = np.zeros(N_COEFFICIENTS)
    f[0] = float((p * p).sum())                              # ASM
    f[1] = float(((ii - jj) ** 2 * p).sum())                 # contrast
    sx, sy = np.sqrt(var_x), np.sqrt(var_y)
    if sx > 0 and sy > 0:
        f[2] = (float((ii * jj * p).sum()) - mu_x * mu_y) / (sx * sy)
    f[3] = float(((ii - mu_x) ** 2 * p).sum())               # variance
    f[4] = float((p / (1.0 + (ii - jj) ** 2)).sum())         # IDM

    # Marginal distributions of i+j and |i-j|.
    sum_idx = (ii + jj).astype(np.int64)
    diff_idx = np.abs(ii - jj).astype(np.int64)
    p_sum = np.bincount(sum_idx.ravel(), weights=p.ravel(), minlength=2 * levels - 1)
    p_diff = np.bincount(diff_idx.ravel(), weights=p.ravel(), minlength=levels)
    k_sum = np.arange(p_sum.size, dtype=np.float64)
    k_diff = np.arange(p_diff.size, dtype=np.float64)

    f[5] = float(k_sum @ p_sum)                              # sum average
    f[6] = float(((k_sum - f[5]) ** 2) @ p_sum)              # sum variance
    f[7] = _entropy(p_sum)                                   # sum entropy
    f[8] = _entropy(p)                                       # entropy
    mu_d = float(k_diff @ p_diff)
    f[9] = float(((k_diff - mu_d) ** 2) @ p_diff)            # difference variance
    f[10] = _entropy(p_diff)                                 # difference entropy

    hx = _entropy(px)
    hy = _entropy(py)
    pxpy = np.outer(px, py)
    nz = p > 0
    hxy1 = -float((p[nz] * np.log(pxpy[nz])).sum())
    nz2 = pxpy > 0
    hxy2 = -float((pxpy[nz2] * np.log(pxpy[nz2])).sum())
    denom = max(hx, hy)
    if denom > 0:
        f[11] = (f[8] - hxy1) / denom
    f[12] = np.sqrt(max(0.0, 1.0 - np.exp(-2.0 * (hxy2 - f[8]))))
    return f


def _entropy(p: np.ndarray) -> float:
    nz = p > 0
    return -float((p[nz] * np.log(p[nz])).sum())


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-segment Haralick vectors, band-sliceable by genome.

    values has one row per segment (segment table order) and
    n_bands * 52 columns in (band, direction, coefficient) order.
    """

    values: np.ndarray        # (n_segments, n_bands * 52)
    segment_ids: np.ndarray   # (n_segments,)
    n_bands: int

    def __post_init__(self):
        if self.values.shape[1] != self.n_bands * FEATURES_PER_BAND:
            raise TextureError(
                f"expected {self.n_bands * FEATURES_PER_BAND} columns, "
                f"got {self.values.shape[1]}"
            )

    def band_columns(self, band: int) -> np.ndarray:
        """Column indices of the 52-column block of 1-based `band`."""
        if not 1 <= band <= self.n_bands:
            raise TextureError(f"unknown band {band}; valid bands are 1..{self.n_bands}")
        start = (band - 1) * FEATURES_PER_BAND
        return np.arange(start, start + FEATURES_PER_BAND)

    def genome_columns(self, genome) -> np.ndarray:
        """Union of band blocks for a binary genome (gene i <-> band i+1)."""
        genome = tuple(int(gi) for gi in genome)
        if len(genome) != self.n_bands:
            raise TextureError(
                f"genome length {len(genome)} does not match {self.n_bands} bands"
            )
        active = [self.band_columns(i + 1) for i, gi in enumerate(genome) if gi]
        if not active:
            raise TextureError("genome has no active bands")
        return np.concatenate(active)

    @property
    def column_names(self) -> list[str]:
        return [
            f"b{band}_d{d}_f{c + 1}"
            for band in range(1, self.n_bands + 1)
            for d in DIRECTIONS
            for c in range(N_COEFFICIENTS)
        ]


def segment_features(
    scene: Scene,
    label_map: LabelMap,
    records: list[SegmentRecord],
    levels: int = DEFAULT_LEVELS,
) -> FeatureMatrix:
    """Haralick features for every record, rows in record order.

    Degenerate segments (no valid pixel pair in some band/direction)
    contribute all-zero blocks instead of aborting the batch.
    """
    quantized = [quantize_band(b.samples, levels) for b in scene.bands]
    n_bands = scene.n_bands
    values = np.zeros((len(records), n_bands * FEATURES_PER_BAND))
    labels = label_map.labels
    for row, rec in enumerate(records):
        x0, y0, x1, y1 = rec.bbox
        # Pad the bbox by 1 px so boundary pairs see their true neighborhood;
        # both endpoints must still be inside the segment mask.
        y0p, y1p = max(0, y0 - 1), min(labels.shape[0], y1 + 1)
        x0p, x1p = max(0, x0 - 1), min(labels.shape[1], x1 + 1)
        mask = labels[y0p:y1p, x0p:x1p] == rec.segment_id
        col = 0
        for b in range(n_bands):
            q = quantized[b][y0p:y1p, x0p:x1p]
            for d in DIRECTIONS:
                g = glcm(q, mask, direction=d, distance=1, levels=levels)
                values[row, col:col + N_COEFFICIENTS] = haralick_13(g)
                col += N_COEFFICIENTS
    return FeatureMatrix(
        values=values,
        segment_ids=np.array([r.segment_id for r in records]),
        n_bands=n_bands,
    )


def write_feature_csv(fm: FeatureMatrix, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["segment_id", *fm.column_names])
        for sid, row in zip(fm.segment_ids, fm.values):
            writer.writerow([int(sid), *[repr(float(v)) for v in row]])


def read_feature_csv(path: str | Path) -> FeatureMatrix:
    with Path(path).open(newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        n_cols = len(header) - 1
        if n_cols % FEATURES_PER_BAND != 0:
            raise TextureError(f"feature CSV has {n_cols} value columns; not a multiple of 52")
        ids, rows = [], []
        for row in reader:
            ids.append(int(row[0]))
            rows.append([float(v) for v in row[1:]])
    return FeatureMatrix(
        values=np.array(rows),
        segment_ids=np.array(ids),
        n_bands=n_cols // FEATURES_PER_BAND,
    )
