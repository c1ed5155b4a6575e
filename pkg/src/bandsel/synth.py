"""Synthetic multiband scenes for experiments and tests.

Real Landsat scenes and their ground-truth masks are not distributable, so
experiments run on generated stand-ins: blob-shaped non-forest regions over
a forest background, with class-dependent texture planted in a chosen set of
"signal" bands. Texture signal is split complementarily between the signal
bands so that no single band separates the classes on its own.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter, label as _blob_label

from .raster import BandPlane, MASK_FOREST, MASK_NONFOREST, Scene

U16_MAX = 65535


def make_mask(
    width: int,
    height: int,
    rng: np.random.Generator,
    nonforest_frac: float = 0.15,
    blob_sigma: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """(mask, blob_ids): blob-shaped non-forest regions over forest.

    blob_ids is 0 on forest and a positive blob id on non-forest pixels.
    """
    sigma = blob_sigma if blob_sigma is not None else max(width, height) / 16.0
    field = gaussian_filter(rng.standard_normal((height, width)), sigma=sigma)
    threshold = np.quantile(field, 1.0 - nonforest_frac)
    nonforest = field >= threshold
    mask = np.where(nonforest, MASK_NONFOREST, MASK_FOREST).astype(np.uint8)
    blob_ids, _ = _blob_label(nonforest)
    return mask, blob_ids


def make_scene(
    scene_id: str,
    width: int,
    height: int,
    n_bands: int = 7,
    seed: int = 0,
    signal_bands: tuple[int, ...] = (5, 6),
    nonforest_frac: float = 0.15,
    blob_sigma: float | None = None,
    forest_noise: float = 250.0,
    nonforest_noise: float = 7000.0,
    background_noise: float = 1200.0,
) -> Scene:
    """A synthetic scene whose class signal lives only in `signal_bands`.

    Signal bands carry high-variance texture on non-forest blobs and smooth
    texture on forest; when two signal bands are given, blobs are split
    between them (odd blob ids textured in the first band, even in the
    second) so both bands are needed for full class separation. All other
    bands carry the same moderate texture everywhere.
    """
    rng = np.random.default_rng(seed)
    mask, blob_ids = make_mask(width, height, rng, nonforest_frac, blob_sigma)

    bands = []
    for index in range(1, n_bands + 1):
        base = gaussian_filter(
            rng.standard_normal((height, width)), sigma=max(width, height) / 8.0
        )
        base = 28000.0 + 6000.0 * base / max(np.abs(base).max(), 1e-9)
        if index in signal_bands:
            amplitude = np.full((height, width), forest_noise)
            if len(signal_bands) >= 2:
                slot = signal_bands.index(index) % 2
                mine = (blob_ids > 0) & ((blob_ids % 2) == (1 - slot))
            else:
                mine = blob_ids > 0
            amplitude[mine] = nonforest_noise
        else:
            amplitude = np.full((height, width), background_noise)
        samples = base + amplitude * rng.standard_normal((height, width))
        bands.append(
            BandPlane(
                index=index,
                samples=np.clip(samples, 0, U16_MAX).astype(np.uint16),
            )
        )
    return Scene(
        id=scene_id,
        width=width,
        height=height,
        bands=tuple(bands),
        mask=mask,
    )


def make_gradient_scene(
    scene_id: str, width: int, height: int, n_bands: int = 7, seed: int = 0
) -> Scene:
    """A smooth, cheap-to-generate scene; useful when only geometry matters.

    Band samples are coarse diagonal block ramps (distinct slope per band)
    and the mask is striped, so rendered tiles stay highly compressible.
    """
    del seed  # fully deterministic; kept for signature parity
    yy, xx = np.mgrid[0:height, 0:width]
    mask = (((yy // 64) % 2) == 1).astype(np.uint8)
    bands = tuple(
        BandPlane(
            index=i,
            samples=(
                ((i + 1) * (xx // 64) + (i + 2) * (yy // 64)) * 997 % (U16_MAX + 1)
            ).astype(np.uint16),
        )
        for i in range(1, n_bands + 1)
    )
    return Scene(id=scene_id, width=width, height=height, bands=bands, mask=mask)


def make_noise_scene(
    scene_id: str, width: int, height: int, n_bands: int = 7, seed: int = 0
) -> Scene:
    """A cheap all-noise scene; useful when only geometry matters (tiling)."""
    rng = np.random.default_rng(seed)
    mask, _ = make_mask(width, height, rng, nonforest_frac=0.2)
    bands = tuple(
        BandPlane(
            index=i,
            samples=rng.integers(0, U16_MAX + 1, size=(height, width), dtype=np.uint16),
        )
        for i in range(1, n_bands + 1)
    )
    return Scene(id=scene_id, width=width, height=height, bands=bands, mask=mask)
