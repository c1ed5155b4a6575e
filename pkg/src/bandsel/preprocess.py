"""PCA over band space: project B bands down to a 3-plane false-color image."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import Scene

N_COMPONENTS = 3


class PcaError(Exception):
    pass


class DegenerateDataError(PcaError):
    """All-constant input; the covariance has no usable structure."""


@dataclass(frozen=True)
class PcaModel:
    """Top-3 principal directions of the B-dimensional pixel cloud.

    components[k] are unit-norm, pairwise orthogonal, in descending
    eigenvalue order; the largest-magnitude coefficient of each component
    is positive so projections are reproducible.
    """

    mean: np.ndarray               # (B,)
    components: np.ndarray         # (3, B)
    explained_variance: np.ndarray  # (3,), non-increasing

    @property
    def n_bands(self) -> int:
        return self.mean.shape[0]


def _pixel_matrix(scene: Scene, sample_stride: int) -> np.ndarray:
    """(N, B) float64 pixel cloud, subsampled by `sample_stride` in raster order."""
    planes = [b.samples.ravel() for b in scene.bands]
    stacked = np.stack(planes, axis=1).astype(np.float64)
    return stacked[::sample_stride]


def _fit_pixels(pixels: np.ndarray) -> PcaModel:
    mean = pixels.mean(axis=0)
    centered = pixels - mean
    cov = centered.T @ centered / max(pixels.shape[0] - 1, 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    eigvecs = eigvecs[:, order]
    if eigvals[0] <= 0.0:
        raise DegenerateDataError("input has zero variance in every band")
    components = eigvecs[:, :N_COMPONENTS].T.copy()
    for k in range(N_COMPONENTS):
        pivot = np.argmax(np.abs(components[k]))
        if components[k, pivot] < 0:
            components[k] = -components[k]
    return PcaModel(
        mean=mean,
        components=components,
        explained_variance=eigvals[:N_COMPONENTS].copy(),
    )


def pca_fit(scene: Scene, sample_stride: int = 4) -> PcaModel:
    """Fit PCA on the scene's pixel cloud and keep the top 3 components."""
    if scene.n_bands < N_COMPONENTS:
        raise PcaError(f"PCA needs at least {N_COMPONENTS} bands, scene has {scene.n_bands}")
    if sample_stride < 1:
        raise PcaError(f"sample_stride must be >= 1, got {sample_stride}")
    return _fit_pixels(_pixel_matrix(scene, sample_stride))


def pca_fit_global(scenes, sample_stride: int = 4) -> PcaModel:
    """Fit one shared model on the pooled pixel clouds of several scenes."""
    scenes = list(scenes)
    if not scenes:
        raise PcaError("need at least one scene")
    n_bands = scenes[0].n_bands
    if any(s.n_bands != n_bands for s in scenes):
        raise PcaError("all scenes must have the same band count for a global fit")
    if n_bands < N_COMPONENTS:
        raise PcaError(f"PCA needs at least {N_COMPONENTS} bands")
    return _fit_pixels(np.vstack([_pixel_matrix(s, sample_stride) for s in scenes]))


def pca_project(scene: Scene, model: PcaModel, normalize: bool = True) -> np.ndarray:
    """(H, W, 3) projection of the scene onto the model's components.

    Each plane is (v - mean) . component_k per pixel; with `normalize` each
    plane is then min-max scaled to [0, 1] (a constant plane maps to 0).
    """
    if model.n_bands != scene.n_bands:
        raise PcaError(
            f"model fitted on {model.n_bands} bands, scene has {scene.n_bands}"
        )
    pixels = _pixel_matrix(scene, sample_stride=1)
    proj = (pixels - model.mean) @ model.components.T
    planes = proj.reshape(scene.height, scene.width, N_COMPONENTS)
    if not normalize:
        return planes
    out = np.empty_like(planes)
    for k in range(N_COMPONENTS):
        p = planes[:, :, k]
        lo, hi = p.min(), p.max()
        out[:, :, k] = 0.0 if hi <= lo else (p - lo) / (hi - lo)
    return out
