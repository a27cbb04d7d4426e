#!/usr/bin/env python3
"""Build a synthetic demo data root: snapshots, ground truth, and stacks.

Writes three scenes under --out:
  flat      vertical field bands (clean contiguous baseline)
  roads     the same bands cut by a road grid (fragmented variant)
  voronoi   irregular field mosaic with per-field color jitter

Each scene gets snapshots/<id>.png + truth/<id>.npy, plus a stacks/<id>.msst
time series so the snapshot path can also be exercised from raw stacks.
"""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from fieldseg.stack_io import write_stack_msst
from fieldseg.synthetic import (
    add_road_grid,
    flat_fields_scene,
    stack_from_rgb,
    voronoi_scene,
    write_scene,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="demo_data", help="data root to create")
    parser.add_argument("--side", type=int, default=300)
    parser.add_argument("--fields", type=int, default=3)
    parser.add_argument("--cells", type=int, default=24, help="voronoi field count")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    root = Path(args.out)
    third = args.side // 3
    scenes = {}
    rgb, labels = flat_fields_scene(args.side, args.fields)
    scenes["flat"] = (rgb, labels)
    scenes["roads"] = add_road_grid(rgb, labels, road_rows=(third, 2 * third),
                                    width=4)
    scenes["voronoi"] = voronoi_scene(args.side, args.cells, args.fields,
                                      seed=args.seed)

    for name, (scene_rgb, scene_labels) in scenes.items():
        write_scene(root, name, scene_rgb, scene_labels)
        stack = stack_from_rgb(scene_rgb, name)
        write_stack_msst(stack, root / "stacks" / f"{name}.msst")
        print(f"{name}: side={args.side} classes={scene_labels.max()} "
              f"-> snapshots/{name}.png truth/{name}.npy stacks/{name}.msst")
    print(f"data root ready at {root}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
