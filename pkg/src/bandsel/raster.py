"""Multiband scene I/O: flat 16-bit band rasters, class masks, PNG rendering.

On-disk scene layout (one directory per scene):
    header.json   -- {"width": W, "height": H, "bands": B,
                      "pixel_area_km2": optional, "id": optional,
                      "meta": optional opaque dict}
    band_<i>.raw  -- little-endian uint16, row-major, i = 1..B
    mask.raw      -- uint8, row-major, values in {0, 1, 255}

Mask encoding: 0 = forest, 1 = non-forest (deforested), 255 = nodata.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

MASK_FOREST = 0
MASK_NONFOREST = 1
MASK_NODATA = 255
VALID_MASK_VALUES = frozenset({MASK_FOREST, MASK_NONFOREST, MASK_NODATA})

# Percentile pair for the 8-bit contrast stretch used by PNG export.
STRETCH_PERCENTILES = (2.0, 98.0)


class RasterError(Exception):
    """Base class for scene loading/validation failures."""


class SceneIOError(RasterError):
    """Missing or truncated on-disk scene file."""


class SceneValidationError(RasterError):
    """Scene contents violate an invariant (dimensions, mask encoding)."""


@dataclass(frozen=True)
class BandPlane:
    """One spectral band: 1-based index plus a (H, W) uint16 sample array."""

    index: int
    samples: np.ndarray

    def __post_init__(self):
        if self.index < 1:
            raise SceneValidationError(f"band index must be >= 1, got {self.index}")
        if self.samples.ndim != 2:
            raise SceneValidationError("band samples must be a 2-D array")


@dataclass(frozen=True)
class Scene:
    """An immutable multiband raster with an aligned ground-truth mask."""

    id: str
    width: int
    height: int
    bands: tuple[BandPlane, ...]
    mask: np.ndarray
    pixel_area_km2: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.bands) < 1:
            raise SceneValidationError("scene must have at least one band")
        indices = [b.index for b in self.bands]
        if sorted(indices) != list(range(1, len(indices) + 1)):
            raise SceneValidationError(
                f"band indices must be exactly 1..{len(indices)}, got {indices}"
            )
        for b in self.bands:
            if b.samples.shape != (self.height, self.width):
                raise SceneValidationError(
                    f"band {b.index} has shape {b.samples.shape}, "
                    f"expected {(self.height, self.width)}"
                )
        if self.mask.shape != (self.height, self.width):
            raise SceneValidationError(
                f"mask shape {self.mask.shape} does not match scene "
                f"{(self.height, self.width)}"
            )
        bad = ~np.isin(self.mask, (MASK_FOREST, MASK_NONFOREST, MASK_NODATA))
        if bad.any():
            offset = int(np.flatnonzero(bad.ravel())[0])
            value = int(self.mask.ravel()[offset])
            raise SceneValidationError(
                f"mask value {value} at offset {offset} not in {{0, 1, 255}}"
            )

    @property
    def n_bands(self) -> int:
        return len(self.bands)

    def band(self, index: int) -> np.ndarray:
        """Samples of the 1-based band `index`; raises on unknown index."""
        if not 1 <= index <= self.n_bands:
            raise SceneValidationError(
                f"unknown band index {index}; valid indices are 1..{self.n_bands}"
            )
        return self.bands[index - 1].samples


def _read_exact(path: Path, n_bytes: int) -> bytes:
    if not path.exists():
        raise SceneIOError(f"missing file: {path.name}")
    data = path.read_bytes()
    if len(data) != n_bytes:
        raise SceneIOError(
            f"{path.name}: expected {n_bytes} bytes, found {len(data)}"
        )
    return data


def load_scene(dir_path: str | Path) -> Scene:
    """Load and validate a scene directory (see module docstring for layout)."""
    dir_path = Path(dir_path)
    header_path = dir_path / "header.json"
    if not header_path.exists():
        raise SceneIOError(f"missing file: {header_path}")
    header = json.loads(header_path.read_text())
    for key in ("width", "height", "bands"):
        if key not in header:
            raise SceneValidationError(f"header.json missing key {key!r}")
    width, height, n_bands = int(header["width"]), int(header["height"]), int(header["bands"])
    if width < 1 or height < 1 or n_bands < 1:
        raise SceneValidationError("width, height and bands must all be >= 1")
    n_px = width * height

    bands = []
    for i in range(1, n_bands + 1):
        raw = _read_exact(dir_path / f"band_{i}.raw", n_px * 2)
        samples = np.frombuffer(raw, dtype="<u2").reshape(height, width)
        bands.append(BandPlane(index=i, samples=samples))

    mask_raw = _read_exact(dir_path / "mask.raw", n_px)
    mask = np.frombuffer(mask_raw, dtype=np.uint8).reshape(height, width)

    area = header.get("pixel_area_km2")
    return Scene(
        id=str(header.get("id", dir_path.name)),
        width=width,
        height=height,
        bands=tuple(bands),
        mask=mask,
        pixel_area_km2=None if area is None else float(area),
        meta=dict(header.get("meta", {})),
    )


def write_scene(scene: Scene, dir_path: str | Path) -> None:
    """Write a scene directory; round-trips byte-identically with load_scene."""
    dir_path = Path(dir_path)
    dir_path.mkdir(parents=True, exist_ok=True)
    header = {
        "id": scene.id,
        "width": scene.width,
        "height": scene.height,
        "bands": scene.n_bands,
    }
    if scene.pixel_area_km2 is not None:
        header["pixel_area_km2"] = scene.pixel_area_km2
    if scene.meta:
        header["meta"] = scene.meta
    (dir_path / "header.json").write_text(json.dumps(header, indent=2))
    for b in scene.bands:
        (dir_path / f"band_{b.index}.raw").write_bytes(
            np.ascontiguousarray(b.samples, dtype="<u2").tobytes()
        )
    (dir_path / "mask.raw").write_bytes(
        np.ascontiguousarray(scene.mask, dtype=np.uint8).tobytes()
    )


def stretch_to_uint8(plane: np.ndarray) -> np.ndarray:
    """Percentile contrast stretch of one real/integer plane to uint8.

    Linear stretch between the 2nd and 98th percentiles; a zero-range plane
    (constant, or constant between those percentiles) renders black.
    """
    plane = np.asarray(plane, dtype=np.float64)
    lo, hi = np.percentile(plane, STRETCH_PERCENTILES)
    if hi <= lo:
        return np.zeros(plane.shape, dtype=np.uint8)
    scaled = np.clip((plane - lo) / (hi - lo), 0.0, 1.0)
    return np.round(scaled * 255.0).astype(np.uint8)


def render_composition(scene: Scene, band_order) -> np.ndarray:
    """(H, W, 3) uint8 RGB image with channels sourced from `band_order`.

    Each channel is stretched independently; repeats are allowed.
    """
    band_order = list(band_order)
    if len(band_order) != 3:
        raise SceneValidationError(
            f"band_order must have exactly 3 indices, got {len(band_order)}"
        )
    channels = [stretch_to_uint8(scene.band(i)) for i in band_order]
    return np.stack(channels, axis=-1)


def compose_png(scene: Scene, band_order, out: str | Path) -> Path:
    """Render a 3-band composition (e.g. 6-5-1 -> R-G-B) to an 8-bit PNG."""
    rgb = render_composition(scene, band_order)
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(rgb, mode="RGB").save(out, format="PNG")
    return out


def quantize_band(samples: np.ndarray, levels: int) -> np.ndarray:
    """Linear min-max quantization of one band to integer levels [0, levels).

    q = floor((v - min) * levels / (max - min + 1)); a constant band maps to
    level 0 everywhere.
    """
    if levels < 2:
        raise ValueError(f"levels must be >= 2, got {levels}")
    if isinstance(samples, BandPlane):
        samples = samples.samples
    samples = np.asarray(samples)
    vmin = int(samples.min())
    vmax = int(samples.max())
    if vmax == vmin:
        return np.zeros(samples.shape, dtype=np.int32)
    span = vmax - vmin + 1
    q = (samples.astype(np.int64) - vmin) * levels // span
    return q.astype(np.int32)
