#!/usr/bin/env python3
"""Write data/ml-100k/u.data (user, item, rating, timestamp; tab separated).

Uses the GroupLens archive when reachable, otherwise the copy of the same
100,000 ratings bundled in the pytorch-widedeep wheel.
"""

import argparse
import io
import pathlib
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

GROUPLENS = "https://files.grouplens.org/datasets/movielens/ml-100k.zip"
WHEEL = "pytorch-widedeep==1.7.0"
WHEEL_MEMBER = "pytorch_widedeep/datasets/data/MovieLens100k_data.parquet.brotli"


def from_grouplens() -> bytes:
    with urllib.request.urlopen(GROUPLENS, timeout=30) as resp:
        archive = zipfile.ZipFile(io.BytesIO(resp.read()))
    return archive.read("ml-100k/u.data")


def from_wheel(wheel: pathlib.Path | None) -> bytes:
    import pandas as pd

    with tempfile.TemporaryDirectory() as tmp:
        if wheel is None:
            subprocess.run(
                [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", tmp, WHEEL],
                check=True,
            )
            wheel = next(pathlib.Path(tmp).glob("*.whl"))
        frame = pd.read_parquet(io.BytesIO(zipfile.ZipFile(wheel).read(WHEEL_MEMBER)))
    cols = ["user_id", "movie_id", "rating", "timestamp"]
    return frame[cols].to_csv(sep="\t", header=False, index=False).encode()


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    root = pathlib.Path(__file__).resolve().parent.parent
    parser.add_argument("--out", type=pathlib.Path, default=root / "data/ml-100k/u.data")
    parser.add_argument("--wheel", type=pathlib.Path, help="local pytorch-widedeep wheel")
    args = parser.parse_args()

    if args.wheel:
        data = from_wheel(args.wheel)
    else:
        try:
            data = from_grouplens()
        except OSError as err:
            print(f"grouplens unavailable ({err}); using {WHEEL}", file=sys.stderr)
            data = from_wheel(None)

    lines = data.count(b"\n")
    if lines != 100_000:
        print(f"expected 100000 ratings, got {lines}", file=sys.stderr)
        return 1
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_bytes(data)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
