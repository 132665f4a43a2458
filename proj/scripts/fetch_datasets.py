#!/usr/bin/env python3
"""Verify the vendored CSVs and fetch the datasets that are not vendored.

Downloads Soybean-small and Caesarian from the UCI repository, converts them to
the CSV layout used in data/, and writes data/suite_all.json listing every
dataset present. Raw download digests are printed so they can be pinned.
"""

import argparse
import csv
import hashlib
import io
import json
import sys
import urllib.request
from pathlib import Path

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"

VENDORED = {
    "zoo.csv": "069cc8b78c60a6a0d563ccf70fc2398892647e73af874ebe67f68605372a03f9",
    "lenses.csv": "f46637dc7d65c11670663a452585e1124e5c2bce0546f4ad6db7cae3e368fffb",
    "hayes_roth.csv": "105d3ad9e68f1d154c33417c5d47b85d48eacd9e821bff089754766d3aa30281",
}

SUITE = [
    {"name": "soybean_small", "path": "soybean_small.csv", "label_column": "class", "k_star": 4},
    {"name": "zoo", "path": "zoo.csv", "label_column": "type", "k_star": 7},
    {"name": "lenses", "path": "lenses.csv", "label_column": "lenses", "k_star": 3},
    {"name": "hayes_roth", "path": "hayes_roth.csv", "label_column": "class", "k_star": 3},
    {"name": "caesarian", "path": "caesarian.csv", "label_column": "caesarian", "k_star": 2},
]


def sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def download(url: str) -> bytes:
    with urllib.request.urlopen(url, timeout=60) as resp:
        data = resp.read()
    print(f"fetched {url} sha256={sha256(data)}")
    return data


def write_rows(path: Path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue())
    print(f"wrote {path} ({len(rows)} rows) sha256={sha256(path.read_bytes())}")


def soybean_small(out: Path):
    text = download(f"{UCI}/soybean/soybean-small.data").decode()
    rows = [line.strip().split(",") for line in text.splitlines() if line.strip()]
    if len(rows) != 47 or any(len(r) != 36 for r in rows):
        raise ValueError("unexpected soybean-small layout")
    write_rows(out, [f"a{i}" for i in range(1, 36)] + ["class"], rows)


def caesarian(out: Path):
    text = download(f"{UCI}/00472/caesarian.csv.arff").decode()
    body = text.split("@data", 1)[-1] if "@data" in text else text.split("@DATA", 1)[-1]
    rows = [[v.strip() for v in line.split(",")] for line in body.splitlines()
            if line.strip() and not line.startswith("%")]
    if len(rows) != 80 or any(len(r) != 6 for r in rows):
        raise ValueError("unexpected caesarian layout")
    write_rows(out, ["age", "delivery_number", "delivery_time", "blood_pressure", "heart_problem", "caesarian"], rows)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data-dir", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    parser.add_argument("--force", action="store_true", help="re-download files that already exist")
    args = parser.parse_args()

    ok = True
    for name, digest in VENDORED.items():
        actual = sha256((args.data_dir / name).read_bytes())
        if actual != digest:
            print(f"checksum mismatch for {name}: {actual}", file=sys.stderr)
            ok = False

    for name, fetch in (("soybean_small.csv", soybean_small), ("caesarian.csv", caesarian)):
        path = args.data_dir / name
        if path.exists() and not args.force:
            print(f"{path} exists, skipping")
            continue
        try:
            fetch(path)
        except (OSError, ValueError) as err:
            print(f"could not fetch {name}: {err}", file=sys.stderr)
            ok = False

    present = [d for d in SUITE if (args.data_dir / d["path"]).exists()]
    for d in present:
        d["missing_token"] = "?"
    (args.data_dir / "suite_all.json").write_text(json.dumps({"datasets": present}, indent=2) + "\n")
    print(f"suite_all.json lists {len(present)} datasets")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
