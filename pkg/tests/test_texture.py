import numpy as np
import pytest

from bandsel.segments import SegmentRecord
from bandsel.superpixel import LabelMap
from bandsel.texture import (
    FEATURES_PER_BAND,
    FeatureMatrix,
    TextureError,
    glcm,
    haralick_13,
    read_feature_csv,
    segment_features,
    write_feature_csv,
)
from haralick_oracle import glcm_oracle, haralick_oracle
from test_raster import make_scene


def full_mask(shape):
    return np.ones(shape, dtype=bool)


def test_glcm_hand_example():
    q = np.array([[0, 0], [1, 1]])
    g = glcm(q, full_mask((2, 2)), direction=0, levels=2)
    assert np.allclose(g.matrix, [[0.5, 0.0], [0.0, 0.5]])
    assert g.pair_count == 4


def test_glcm_constant_image():
    q = np.zeros((4, 4), dtype=int)
    for d in (0, 45, 90, 135):
        g = glcm(q, full_mask((4, 4)), direction=d, levels=8)
        assert g.matrix[0, 0] == 1.0
        assert g.matrix.sum() == pytest.approx(1.0, abs=1e-12)


def test_glcm_single_pixel_mask_flagged():
    q = np.zeros((3, 3), dtype=int)
    mask = np.zeros((3, 3), dtype=bool)
    mask[1, 1] = True
    g = glcm(q, mask, direction=0, levels=4)
    assert g.pair_count == 0
    assert (g.matrix == 0).all()
    assert (haralick_13(g) == 0).all()


def test_glcm_empty_mask_errors():
    with pytest.raises(TextureError):
        glcm(np.zeros((3, 3), dtype=int), np.zeros((3, 3), dtype=bool), direction=0, levels=4)


def test_glcm_symmetry_and_normalization_random():
    rng = np.random.default_rng(0)
    for _ in range(50):
        h, w = rng.integers(2, 12, 2)
        levels = int(rng.integers(2, 16))
        q = rng.integers(0, levels, (h, w))
        mask = rng.random((h, w)) < 0.8
        if not mask.any():
            mask[0, 0] = True
        for d in (0, 45, 90, 135):
            g = glcm(q, mask, direction=d, levels=levels)
            assert np.array_equal(g.matrix, g.matrix.T)
            if g.pair_count:
                assert abs(g.matrix.sum() - 1.0) < 1e-12


def test_haralick_hand_example():
    g = glcm(np.array([[0, 0], [1, 1]]), full_mask((2, 2)), direction=0, levels=2)
    f = haralick_13(g)
    assert f[0] == pytest.approx(0.5)          # ASM
    assert f[1] == pytest.approx(0.0)          # contrast
    assert f[8] == pytest.approx(np.log(2))    # entropy


def test_haralick_constant_degenerate():
    g = glcm(np.zeros((4, 4), dtype=int), full_mask((4, 4)), direction=0, levels=8)
    f = haralick_13(g)
    assert f[0] == 1.0          # ASM
    assert f[1] == 0.0          # contrast
    assert f[2] == 0.0          # correlation (degenerate rule)
    assert f[8] == 0.0          # entropy
    assert np.isfinite(f).all()


def test_haralick_matches_oracle_random_images():
    rng = np.random.default_rng(1)
    for _ in range(60):
        h, w = rng.integers(4, 10, 2)
        levels = int(rng.integers(4, 16))
        q = rng.integers(0, levels, (h, w))
        mask = rng.random((h, w)) < 0.9
        if not mask.any():
            mask[0, 0] = True
        for d in (0, 45, 90, 135):
            g = glcm(q, mask, direction=d, levels=levels)
            ours = haralick_13(g)
            p_oracle, total = glcm_oracle(q.tolist(), mask.tolist(), d, levels)
            assert total == g.pair_count
            if total == 0:
                assert (ours == 0).all()
                continue
            expected = haralick_oracle(p_oracle)
            assert np.allclose(ours, expected, atol=1e-9, rtol=0)


def scene_and_map(n_bands, shape=(10, 10), seed=0):
    rng = np.random.default_rng(seed)
    bands = [rng.integers(0, 65536, shape, dtype=np.uint16) for _ in range(n_bands)]
    scene = make_scene(bands, np.zeros(shape))
    lm = LabelMap(labels=np.zeros(shape, dtype=np.int32), segment_count=1)
    rec = SegmentRecord(
        segment_id=0,
        scene_id="s",
        area=shape[0] * shape[1],
        bbox=(0, 0, shape[1], shape[0]),
        homogeneity=1.0,
        label="forest",
    )
    return scene, lm, [rec]


def test_feature_matrix_column_counts():
    scene, lm, recs = scene_and_map(7)
    fm = segment_features(scene, lm, recs)
    assert fm.values.shape == (1, 7 * FEATURES_PER_BAND)  # 364

    scene1, lm1, recs1 = scene_and_map(1)
    fm1 = segment_features(scene1, lm1, recs1)
    assert fm1.values.shape == (1, FEATURES_PER_BAND)  # 52


def test_duplicated_band_identical_blocks():
    rng = np.random.default_rng(2)
    a = rng.integers(0, 65536, (12, 12), dtype=np.uint16)
    b = rng.integers(0, 65536, (12, 12), dtype=np.uint16)
    scene = make_scene([a, b, a], np.zeros((12, 12)))
    lm = LabelMap(labels=np.zeros((12, 12), dtype=np.int32), segment_count=1)
    rec = SegmentRecord(0, "s", 144, (0, 0, 12, 12), 1.0, "forest")
    fm = segment_features(scene, lm, [rec])
    assert np.array_equal(
        fm.values[0, fm.band_columns(1)], fm.values[0, fm.band_columns(3)]
    )
    assert not np.array_equal(
        fm.values[0, fm.band_columns(1)], fm.values[0, fm.band_columns(2)]
    )


def test_translation_invariance():
    rng = np.random.default_rng(3)
    patch = rng.integers(0, 65536, (5, 5), dtype=np.uint16)

    def features_at(y0, x0):
        band = np.zeros((16, 16), dtype=np.uint16)
        band[y0:y0 + 5, x0:x0 + 5] = patch
        labels = np.zeros((16, 16), dtype=np.int32)
        labels[y0:y0 + 5, x0:x0 + 5] = 1
        scene = make_scene([band], np.zeros((16, 16)))
        lm = LabelMap(labels=labels, segment_count=2)
        rec = SegmentRecord(1, "s", 25, (x0, y0, x0 + 5, y0 + 5), 1.0, "forest")
        return segment_features(scene, lm, [rec]).values[0]

    assert np.array_equal(features_at(2, 3), features_at(8, 9))


def test_genome_columns():
    scene, lm, recs = scene_and_map(7)
    fm = segment_features(scene, lm, recs)
    cols = fm.genome_columns((0, 0, 0, 0, 0, 0, 1))
    assert cols.size == 52
    assert cols[0] == 6 * 52
    assert fm.genome_columns((1,) * 7).size == 364
    with pytest.raises(TextureError):
        fm.genome_columns((0,) * 7)
    with pytest.raises(TextureError):
        fm.genome_columns((1, 0))


def test_feature_csv_round_trip(tmp_path):
    scene, lm, recs = scene_and_map(2, seed=4)
    fm = segment_features(scene, lm, recs)
    path = tmp_path / "features.csv"
    write_feature_csv(fm, path)
    reloaded = read_feature_csv(path)
    assert reloaded.n_bands == 2
    assert np.array_equal(reloaded.segment_ids, fm.segment_ids)
    assert np.array_equal(reloaded.values, fm.values)
