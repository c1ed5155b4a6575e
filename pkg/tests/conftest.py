import numpy as np
import pytest

from bandsel import classifier, preprocess, segments as seg, superpixel, synth, texture


class BandSignalDataset:
    """Pooled multi-scene segment dataset whose class signal lives in bands 5 and 6."""

    def __init__(self, fm, y, splits):
        self.fm = fm
        self.y = y
        self.splits = splits


def build_band_signal_dataset(
    seeds=(100, 101, 102), size=360, split_seed=42, target_segments=185
) -> BandSignalDataset:
    per_scene = []
    for i, s in enumerate(seeds):
        scene = synth.make_scene(f"scene{i + 1}", size, size, seed=s, nonforest_frac=0.25)
        model = preprocess.pca_fit(scene, sample_stride=4)
        fc = preprocess.pca_project(scene, model)
        lm = superpixel.slic(fc, target_segments=target_segments)
        table = seg.filter_segments(seg.build_segment_table(scene, lm))
        per_scene.append((scene, lm, table))

    pooled = []
    for _, _, table in per_scene:
        pooled.extend(table)
    pooled = seg.split_segments(pooled, seed=split_seed)

    blocks, ys, sps = [], [], []
    idx = 0
    for scene, lm, table in per_scene:
        records = pooled[idx:idx + len(table)]
        idx += len(table)
        kept = [r for r in records if r.split != seg.SPLIT_EXCLUDED]
        fm = texture.segment_features(scene, lm, kept)
        blocks.append(fm.values)
        y, s = classifier.labels_and_splits(kept)
        ys.append(y)
        sps.append(s)
    values = np.vstack(blocks)
    fm = texture.FeatureMatrix(
        values=values, segment_ids=np.arange(values.shape[0]), n_bands=7
    )
    return BandSignalDataset(fm=fm, y=np.concatenate(ys), splits=np.concatenate(sps))


@pytest.fixture(scope="session")
def band_signal_dataset() -> BandSignalDataset:
    return build_band_signal_dataset()
