"""Command-line orchestration of the band-selection pipeline.

Subcommands: ingest, pca, slic, segments, features, evolve, report,
compose, tile, pipeline. Stages are checkpointed by a content hash of their
inputs, so a rerun skips completed stages unless --force is given.

Exit codes: 0 success, 1 configuration/validation error, 2 runtime error.
Stage progress goes to stderr as machine-parseable "[stage] status" lines.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import classifier, preprocess, raster, report as report_mod, segments as seg_mod
from . import superpixel, texture, tiler, umda

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

ENV_OUTPUT_ROOT = "BANDSEL_OUTPUT_ROOT"

STAGES = (
    "ingest",
    "pca",
    "slic",
    "segments",
    "features",
    "evolve",
    "report",
    "compose",
    "tile",
)


class ConfigError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage: str, cause: str):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage


@dataclass(frozen=True)
class SlicParams:
    target_segments: int | None = None  # None -> round(H*W / 700) per scene
    compactness: float = 10.0
    iterations: int = 10


@dataclass(frozen=True)
class FilterParams:
    min_homogeneity: float = seg_mod.MIN_HOMOGENEITY
    min_area: int = seg_mod.MIN_AREA


@dataclass(frozen=True)
class SplitParams:
    fractions: tuple[float, float, float] = seg_mod.DEFAULT_FRACTIONS
    seed: int = 42


@dataclass(frozen=True)
class PcaParams:
    sample_stride: int = 4
    global_fit: bool = False


@dataclass(frozen=True)
class UmdaParams:
    population_size: int = 10
    generations: int = 10
    parents: int = 5
    offspring: int = 5
    seeds: tuple[int, ...] = (1, 10, 20, 30, 42)
    clamp: tuple[float, float] = (0.05, 0.95)


@dataclass(frozen=True)
class TileParams:
    tile_size: int = 256
    stride: int = 64
    augment: str = tiler.AUGMENT_D8
    train_scenes: tuple[str, ...] = ()
    test_scenes: tuple[str, ...] = ()


@dataclass(frozen=True)
class RunConfig:
    scenes: tuple[str, ...]
    output_root: str
    pca: PcaParams = PcaParams()
    slic: SlicParams = SlicParams()
    filter: FilterParams = FilterParams()
    split: SplitParams = SplitParams()
    quant_levels: int = 32
    svm: classifier.SvmConfig = classifier.SvmConfig()
    umda: UmdaParams = UmdaParams()
    composition: tuple[int, ...] | None = None
    report_top_k: int = 3
    tile: TileParams = TileParams()
    jobs: int = 1


def _build(cls, data: dict, name: str):
    valid = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - valid
    if unknown:
        raise ConfigError(f"unknown keys in {name!r} section: {sorted(unknown)}")
    return cls(**data)


def load_config(path: str | Path, seed: int | None = None, jobs: int | None = None) -> RunConfig:
    """Parse and validate a JSON run configuration.

    --seed overrides the split seed and replaces the UMDA seed list;
    $BANDSEL_OUTPUT_ROOT overrides output_root.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc

    if "scenes" not in data or not data["scenes"]:
        raise ConfigError("config must list at least one scene directory")
    if "output_root" not in data:
        raise ConfigError("config must set output_root")

    def section(name, cls):
        raw = dict(data.get(name, {}))
        for key in ("fractions", "seeds", "clamp", "train_scenes", "test_scenes"):
            if key in raw and isinstance(raw[key], list):
                raw[key] = tuple(raw[key])
        return _build(cls, raw, name)

    svm_raw = dict(data.get("svm", {}))
    config = RunConfig(
        scenes=tuple(data["scenes"]),
        output_root=os.environ.get(ENV_OUTPUT_ROOT, data["output_root"]),
        pca=section("pca", PcaParams),
        slic=section("slic", SlicParams),
        filter=section("filter", FilterParams),
        split=section("split", SplitParams),
        quant_levels=int(data.get("quant_levels", 32)),
        svm=_build(classifier.SvmConfig, svm_raw, "svm"),
        umda=section("umda", UmdaParams),
        composition=tuple(data["composition"]) if data.get("composition") else None,
        report_top_k=int(data.get("report_top_k", 3)),
        tile=section("tile", TileParams),
        jobs=1,
    )
    if seed is not None:
        config = dataclasses.replace(
            config,
            split=dataclasses.replace(config.split, seed=seed),
            umda=dataclasses.replace(config.umda, seeds=(seed,)),
        )
    if jobs is not None:
        config = dataclasses.replace(config, jobs=max(1, jobs))
    _validate(config)
    return config


def _validate(config: RunConfig) -> None:
    for scene_dir in config.scenes:
        if not Path(scene_dir).is_dir():
            raise ConfigError(f"scene directory not found: {scene_dir}")
    if not 0.0 <= config.filter.min_homogeneity <= 1.0:
        raise ConfigError(
            f"min_homogeneity must be in [0, 1], got {config.filter.min_homogeneity}"
        )
    if config.filter.min_area < 0:
        raise ConfigError(f"min_area must be >= 0, got {config.filter.min_area}")
    fr = config.split.fractions
    if len(fr) != 3 or any(f < 0 for f in fr) or abs(sum(fr) - 1.0) > 1e-9:
        raise ConfigError(f"split fractions must be 3 non-negative values summing to 1, got {fr}")
    if config.quant_levels < 2:
        raise ConfigError(f"quant_levels must be >= 2, got {config.quant_levels}")
    u = config.umda
    if u.parents + u.offspring != u.population_size:
        raise ConfigError("umda parents + offspring must equal population_size")
    if not u.seeds:
        raise ConfigError("umda seeds must be non-empty")
    lo, hi = u.clamp
    if not 0.0 <= lo <= hi <= 1.0:
        raise ConfigError(f"umda clamp bounds invalid: {u.clamp}")
    if config.composition is not None and not config.composition:
        raise ConfigError("composition override must list at least one band")
    try:
        tiler.TileSpec(config.tile.tile_size, config.tile.stride, config.tile.augment)
    except tiler.TilerError as exc:
        raise ConfigError(str(exc)) from exc
    scene_ids = {Path(s).name for s in config.scenes}
    for sid in (*config.tile.train_scenes, *config.tile.test_scenes):
        if sid not in scene_ids:
            raise ConfigError(f"tile split references unknown scene id {sid!r}")
    overlap = set(config.tile.train_scenes) & set(config.tile.test_scenes)
    if overlap:
        raise ConfigError(f"scenes in both tile splits: {sorted(overlap)}")


def _sha(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        if isinstance(p, bytes):
            h.update(p)
        else:
            h.update(json.dumps(p, sort_keys=True, default=str).encode())
    return h.hexdigest()


def _params_dict(obj) -> dict:
    return dataclasses.asdict(obj)


class Pipeline:
    """Runs pipeline stages with content-hash checkpointing."""

    def __init__(self, config: RunConfig, force: bool = False):
        self.config = config
        self.force = force
        self.root = Path(config.output_root)
        self.stage_dir = self.root / "stages"
        self._scenes: list[raster.Scene] | None = None

    # -- checkpoint plumbing ------------------------------------------------

    def _stamp_path(self, stage: str) -> Path:
        return self.stage_dir / f"{stage}.json"

    def _stamp_hash(self, stage: str) -> str:
        path = self._stamp_path(stage)
        if not path.exists():
            raise StageError(stage, f"stage {stage!r} has not run; run it (or `pipeline`) first")
        return json.loads(path.read_text())["hash"]

    def _cached(self, stage: str, input_hash: str, outputs: list[Path]) -> bool:
        if self.force:
            return False
        path = self._stamp_path(stage)
        if not path.exists():
            return False
        if json.loads(path.read_text())["hash"] != input_hash:
            return False
        return all(p.exists() for p in outputs)

    def _write_stamp(self, stage: str, input_hash: str) -> None:
        self.stage_dir.mkdir(parents=True, exist_ok=True)
        self._stamp_path(stage).write_text(json.dumps({"hash": input_hash}))

    @staticmethod
    def _progress(stage: str, status: str) -> None:
        print(f"[{stage}] {status}", file=sys.stderr)

    def _load_scenes(self) -> list[raster.Scene]:
        if self._scenes is None:
            self._scenes = [raster.load_scene(d) for d in self.config.scenes]
        return self._scenes

    # -- stage drivers ------------------------------------------------------

    def run(self, stages) -> None:
        for stage in stages:
            runner = getattr(self, f"stage_{stage}")
            try:
                cached = runner()
            except (ConfigError, StageError):
                raise
            except Exception as exc:
                raise StageError(stage, str(exc)) from exc
            self._progress(stage, "cached" if cached else "done")

    def stage_ingest(self) -> bool:
        digests = []
        for scene_dir in self.config.scenes:
            d = Path(scene_dir)
            parts = [(d / "header.json").read_bytes()]
            header = json.loads((d / "header.json").read_text())
            for i in range(1, int(header["bands"]) + 1):
                parts.append((d / f"band_{i}.raw").read_bytes())
            parts.append((d / "mask.raw").read_bytes())
            digests.append(_sha(*parts))
        input_hash = _sha(digests)
        if self._cached("ingest", input_hash, []):
            return True
        self._progress("ingest", "running")
        self._load_scenes()  # validates every scene
        self._write_stamp("ingest", input_hash)
        return False

    def stage_pca(self) -> bool:
        input_hash = _sha(self._stamp_hash("ingest"), _params_dict(self.config.pca))
        outputs = [self.root / "pca" / f"{Path(d).name}.npy" for d in self.config.scenes]
        if self._cached("pca", input_hash, outputs):
            return True
        self._progress("pca", "running")
        scenes = self._load_scenes()
        (self.root / "pca").mkdir(parents=True, exist_ok=True)
        shared_model = (
            preprocess.pca_fit_global(scenes, self.config.pca.sample_stride)
            if self.config.pca.global_fit
            else None
        )
        for scene, out in zip(scenes, outputs):
            model = shared_model or preprocess.pca_fit(scene, self.config.pca.sample_stride)
            fc = preprocess.pca_project(scene, model)
            np.save(out, fc.astype(np.float32))
        self._write_stamp("pca", input_hash)
        return False

    def stage_slic(self) -> bool:
        input_hash = _sha(self._stamp_hash("pca"), _params_dict(self.config.slic))
        outputs = [
            self.root / "slic" / Path(d).name / "segments.raw" for d in self.config.scenes
        ]
        if self._cached("slic", input_hash, outputs):
            return True
        self._progress("slic", "running")
        for scene_dir in self.config.scenes:
            sid = Path(scene_dir).name
            fc = np.load(self.root / "pca" / f"{sid}.npy").astype(np.float64)
            target = self.config.slic.target_segments or superpixel.default_target_segments(
                fc.shape[1], fc.shape[0]
            )
            lm = superpixel.slic(
                fc,
                target_segments=target,
                compactness=self.config.slic.compactness,
                iterations=self.config.slic.iterations,
            )
            superpixel.save_label_map(
                lm,
                self.root / "slic" / sid,
                params={
                    "target_segments": target,
                    "compactness": self.config.slic.compactness,
                    "iterations": self.config.slic.iterations,
                },
            )
        self._write_stamp("slic", input_hash)
        return False

    def _segment_tables(self) -> list[list[seg_mod.SegmentRecord]]:
        """Per-scene raw segment tables (deterministic rebuild from label maps)."""
        tables = []
        for scene in self._load_scenes():
            lm = superpixel.load_label_map(self.root / "slic" / scene.id)
            tables.append(seg_mod.build_segment_table(scene, lm))
        return tables

    def stage_segments(self) -> bool:
        input_hash = _sha(
            self._stamp_hash("slic"),
            _params_dict(self.config.filter),
            _params_dict(self.config.split),
        )
        out_csv = self.root / "segments.csv"
        if self._cached("segments", input_hash, [out_csv]):
            return True
        self._progress("segments", "running")
        pooled: list[seg_mod.SegmentRecord] = []
        for table in self._segment_tables():
            pooled.extend(
                seg_mod.filter_segments(
                    table,
                    min_homogeneity=self.config.filter.min_homogeneity,
                    min_area=self.config.filter.min_area,
                )
            )
        pooled = seg_mod.split_segments(
            pooled, fractions=self.config.split.fractions, seed=self.config.split.seed
        )
        seg_mod.write_segment_csv(pooled, out_csv)
        self._write_stamp("segments", input_hash)
        return False

    def _kept_records(self) -> list[seg_mod.SegmentRecord]:
        """Kept (non-excluded) records from segments.csv with bboxes restored."""
        csv_records = seg_mod.read_segment_csv(self.root / "segments.csv")
        bbox_by_key = {}
        for table in self._segment_tables():
            for r in table:
                bbox_by_key[(r.scene_id, r.segment_id)] = r.bbox
        kept = []
        for r in csv_records:
            if r.split == seg_mod.SPLIT_EXCLUDED:
                continue
            kept.append(dataclasses.replace(r, bbox=bbox_by_key[(r.scene_id, r.segment_id)]))
        return kept

    def stage_features(self) -> bool:
        input_hash = _sha(self._stamp_hash("segments"), self.config.quant_levels)
        out_csv = self.root / "features.csv"
        if self._cached("features", input_hash, [out_csv]):
            return True
        self._progress("features", "running")
        kept = self._kept_records()
        scenes = {s.id: s for s in self._load_scenes()}
        label_maps = {
            sid: superpixel.load_label_map(self.root / "slic" / sid) for sid in scenes
        }
        blocks = []
        ids = []
        # segments.csv is grouped by scene in config order, so per-scene
        # extraction preserves the global row order.
        for scene_dir in self.config.scenes:
            sid = Path(scene_dir).name
            recs = [r for r in kept if r.scene_id == sid]
            if not recs:
                continue
            fm = texture.segment_features(
                scenes[sid], label_maps[sid], recs, levels=self.config.quant_levels
            )
            blocks.append(fm.values)
            ids.extend(r.segment_id for r in recs)
        n_bands = next(iter(scenes.values())).n_bands
        fm = texture.FeatureMatrix(
            values=np.vstack(blocks) if blocks else np.zeros((0, n_bands * 52)),
            segment_ids=np.array(ids),
            n_bands=n_bands,
        )
        texture.write_feature_csv(fm, out_csv)
        self._write_stamp("features", input_hash)
        return False

    def stage_evolve(self) -> bool:
        input_hash = _sha(
            self._stamp_hash("features"),
            _params_dict(self.config.umda),
            _params_dict(self.config.svm),
        )
        outputs = [
            self.root / "runs" / f"seed_{s}.jsonl" for s in self.config.umda.seeds
        ]
        if self._cached("evolve", input_hash, outputs):
            return True
        self._progress("evolve", "running")
        fm = texture.read_feature_csv(self.root / "features.csv")
        kept = [
            r
            for r in seg_mod.read_segment_csv(self.root / "segments.csv")
            if r.split != seg_mod.SPLIT_EXCLUDED
        ]
        y, splits = classifier.labels_and_splits(kept)
        memo: dict = {}

        def fitness(genome):
            return classifier.evaluate_genome(
                genome, fm, y, splits, config=self.config.svm, memo=memo
            )

        u = self.config.umda
        for seed, out in zip(u.seeds, outputs):
            cfg = umda.UmdaConfig(
                population_size=u.population_size,
                generations=u.generations,
                parents=u.parents,
                offspring=u.offspring,
                seed=seed,
                clamp=u.clamp,
                genome_length=fm.n_bands,
            )
            _, logs = umda.evolve(cfg, fitness)
            umda.write_log_jsonl(logs, out)
            self._progress("evolve", f"seed {seed} complete")
        self._write_stamp("evolve", input_hash)
        return False

    def _runs(self) -> dict[int, list[umda.GenerationLog]]:
        runs = {}
        for seed in self.config.umda.seeds:
            path = self.root / "runs" / f"seed_{seed}.jsonl"
            if path.exists():
                runs[seed] = umda.read_log_jsonl(path)
        if not runs:
            raise StageError("report", "no completed evolve runs found")
        return runs

    def stage_report(self) -> bool:
        input_hash = _sha(self._stamp_hash("evolve"), self.config.report_top_k)
        out_json = self.root / "report.json"
        if self._cached("report", input_hash, [out_json]):
            print(out_json.read_text())
            return True
        self._progress("report", "running")
        summary = report_mod.summarize(self._runs(), top_k=self.config.report_top_k)
        out_json.write_text(
            json.dumps(
                {
                    "per_seed_best": {
                        str(seed): {
                            "genome": "".join(map(str, genome)),
                            "val": val,
                            "test": test,
                        }
                        for seed, (genome, val, test) in summary.per_seed_best.items()
                    },
                    "band_frequencies": list(summary.band_frequencies),
                    "mean_best": summary.mean_best,
                    "std_best": summary.std_best,
                    "composition": list(summary.composition),
                },
                indent=2,
            )
        )
        print(report_mod.format_summary(summary))
        self._write_stamp("report", input_hash)
        return False

    def _composition(self) -> list[int]:
        if self.config.composition is not None:
            return list(self.config.composition)
        report_path = self.root / "report.json"
        if not report_path.exists():
            raise StageError(
                "compose", "no composition override and no report.json; run `report` first"
            )
        return list(json.loads(report_path.read_text())["composition"])

    def stage_compose(self) -> bool:
        comp = self._composition()
        input_hash = _sha(self._stamp_hash("ingest"), comp)
        outputs = [
            self.root / "compose" / f"{Path(d).name}.png" for d in self.config.scenes
        ]
        if len(comp) == 3 and self._cached("compose", input_hash, outputs):
            return True
        self._progress("compose", "running")
        if len(comp) != 3:
            raise StageError(
                "compose", f"PNG composition needs exactly 3 bands, got {comp}"
            )
        for scene, out in zip(self._load_scenes(), outputs):
            raster.compose_png(scene, comp, out)
        self._write_stamp("compose", input_hash)
        return False

    def stage_tile(self) -> bool:
        comp = self._composition()
        input_hash = _sha(
            self._stamp_hash("ingest"), comp, _params_dict(self.config.tile)
        )
        out_index = self.root / "tiles" / "index.csv"
        if self._cached("tile", input_hash, [out_index]):
            return True
        self._progress("tile", "running")
        t = self.config.tile
        if not t.train_scenes and not t.test_scenes:
            raise StageError("tile", "tile.train_scenes / tile.test_scenes are empty")
        split_plan = {sid: "train" for sid in t.train_scenes}
        split_plan.update({sid: "test" for sid in t.test_scenes})
        scenes = [s for s in self._load_scenes() if s.id in split_plan]
        tiler.build_dataset(
            scenes,
            comp,
            split_plan,
            tiler.TileSpec(tile_size=t.tile_size, stride=t.stride, augment=t.augment),
            self.root / "tiles",
        )
        self._write_stamp("tile", input_hash)
        return False


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bandsel", description="Spectral band-selection pipeline"
    )
    parser.add_argument("command", choices=[*STAGES, "pipeline"])
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--seed", type=int, default=None, help="override split/UMDA seeds")
    parser.add_argument("--jobs", type=int, default=None, help="worker cap (advisory)")
    parser.add_argument("--force", action="store_true", help="ignore stage checkpoints")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config, seed=args.seed, jobs=args.jobs)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    pipeline = Pipeline(config, force=args.force)
    stages = STAGES if args.command == "pipeline" else (args.command,)
    try:
        pipeline.run(stages)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except StageError as exc:
        print(f"stage failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
