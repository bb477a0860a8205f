"""Run every YAML config in configs/ (except the deliberately broken one) into results/<name>/."""

import argparse
import sys
import time
from pathlib import Path

from sgplate.cli import run
from sgplate.config import load_config
from sgplate.errors import SGPlateError

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=ROOT / "results")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("configs", nargs="*", type=Path)
    args = ap.parse_args()
    paths = args.configs or sorted(p for p in (ROOT / "configs").glob("*.yaml") if not p.name.startswith("bad_"))
    status = 0
    for path in paths:
        t0 = time.perf_counter()
        try:
            code = run(load_config(path), args.out / path.stem, args.threads)
        except SGPlateError as exc:
            print(f"{path.name}: {type(exc).__name__}: {exc}", file=sys.stderr)
            code = 3
        print(f"{path.name}: exit {code} in {time.perf_counter() - t0:.1f} s")
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())
