"""Figure generation CLI:

    phasekramers-plot --in <artifact dir> --out <image dir>

The input directory may be a single run (holding run_manifest.json) or a
directory of runs; one PNG per run is written, named after the experiment.
Exits nonzero when no valid artifacts are found or any input is malformed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .figures import ArtifactError, UnsupportedRunError, build_figure, load_run


def _run_dirs(root: Path) -> list[Path]:
    if (root / "run_manifest.json").exists():
        return [root]
    return sorted(d for d in root.iterdir() if d.is_dir() and (d / "run_manifest.json").exists())


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="phasekramers-plot", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--in", dest="in_dir", required=True, help="artifact directory")
    ap.add_argument("--out", dest="out_dir", required=True, help="image directory")
    args = ap.parse_args(argv)

    root = Path(args.in_dir)
    if not root.is_dir():
        print(f"error: {root} is not a directory", file=sys.stderr)
        return 2
    runs = _run_dirs(root)
    if not runs:
        print(f"error: no run manifests under {root}", file=sys.stderr)
        return 2

    scanning = len(runs) > 1 or runs[0] != root
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        for run_dir in runs:
            run = load_run(run_dir)
            try:
                fig, _ = build_figure(run)
            except UnsupportedRunError as exc:
                if not scanning:
                    raise
                print(f"note: skipping {run_dir.name}: {exc}", file=sys.stderr)
                continue
            target = out / f"{run['experiment']}.png"
            fig.savefig(target, format="png")
            plt.close(fig)
            written.append(target.name)
    except ArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not written:
        print("error: no plottable runs found", file=sys.stderr)
        return 2
    print(f"wrote {len(written)} figure(s): {', '.join(written)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
