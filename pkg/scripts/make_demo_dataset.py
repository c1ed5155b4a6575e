#!/usr/bin/env python3
"""Generate a synthetic multiband demo workspace: scenes plus a run config.

Creates N seven-band scenes whose class signal lives in bands 5 and 6 (split
complementarily, so neither band separates the classes alone), writes them in
the scene directory format, and emits a ready-to-run config.json. Run the
pipeline afterwards with:

    bandsel pipeline --config <workspace>/config.json
"""

import argparse
import json
from pathlib import Path

from bandsel import synth
from bandsel.raster import write_scene


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("workspace", type=Path, help="output workspace directory")
    parser.add_argument("--scenes", type=int, default=3, help="number of scenes")
    parser.add_argument("--size", type=int, default=320, help="scene width/height in pixels")
    parser.add_argument("--seed", type=int, default=300, help="base generation seed")
    args = parser.parse_args()

    scene_dirs = []
    test_scene = None
    for i in range(args.scenes):
        scene = synth.make_scene(
            f"scene{i + 1}",
            args.size,
            args.size,
            seed=args.seed + i,
            nonforest_frac=0.28,
            blob_sigma=args.size / 24.0,
        )
        d = args.workspace / "scenes" / scene.id
        write_scene(scene, d)
        scene_dirs.append(str(d))
        test_scene = scene.id
        print(f"wrote {d}")

    config = {
        "scenes": scene_dirs,
        "output_root": str(args.workspace / "out"),
        "tile": {
            "train_scenes": [Path(d).name for d in scene_dirs[:-1]],
            "test_scenes": [test_scene] if args.scenes > 1 else [],
        },
    }
    cfg_path = args.workspace / "config.json"
    cfg_path.write_text(json.dumps(config, indent=2) + "\n")
    print(f"wrote {cfg_path}")


if __name__ == "__main__":
    main()
