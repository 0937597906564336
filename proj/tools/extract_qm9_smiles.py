# SPDX-License-Identifier: Apache-2.0
# Project molgraph-rl - Copyright 2026 molgraph-rl contributors
"""Extract an id,smiles CSV from the public QM9 distribution.

QM9 ships as dsgdb9nsd.xyz.tar.bz2 (figshare, doi:10.6084/m9.figshare.978904),
a tarball of 133885 extended-xyz files. Each file ends with two metadata
lines; the second-to-last holds two SMILES columns: the GDB17 string the
molecule was enumerated from and the SMILES of the B3LYP-relaxed geometry.
This script walks the tarball (or an unpacked directory) and writes one CSV
row per molecule, ready for `molrl ingest`.

Usage:
    python tools/extract_qm9_smiles.py dsgdb9nsd.xyz.tar.bz2 -o qm9.csv
    python tools/extract_qm9_smiles.py path/to/unpacked/dir -o qm9.csv --column gdb17

The ingest pipeline drops charged species and anything the parser rejects,
counting each reason, so this script does no chemistry of its own.
"""

import argparse
import csv
import os
import sys
import tarfile


def smiles_from_xyz(name, text, column):
    lines = text.strip().splitlines()
    if len(lines) < 5:
        raise ValueError(f"{name}: too short for the QM9 xyz layout")
    fields = lines[-2].split()
    if len(fields) < 2:
        raise ValueError(f"{name}: SMILES line has {len(fields)} fields, expected 2")
    return fields[0] if column == "gdb17" else fields[1]


def iter_xyz(source):
    if os.path.isdir(source):
        for entry in sorted(os.listdir(source)):
            if not entry.endswith(".xyz"):
                continue
            with open(os.path.join(source, entry), "r", encoding="ascii") as fh:
                yield entry, fh.read()
    else:
        with tarfile.open(source, "r:*") as tar:
            for member in sorted(tar.getmembers(), key=lambda m: m.name):
                if not member.isfile() or not member.name.endswith(".xyz"):
                    continue
                yield os.path.basename(member.name), tar.extractfile(member).read().decode("ascii")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("source", help="dsgdb9nsd.xyz tarball or an unpacked directory")
    ap.add_argument("-o", "--output", default="qm9.csv", help="output CSV path")
    ap.add_argument("--column", choices=("relaxed", "gdb17"), default="relaxed",
                    help="which SMILES column to take (default: relaxed geometry)")
    args = ap.parse_args()

    count = 0
    with open(args.output, "w", newline="", encoding="ascii") as out:
        writer = csv.writer(out)
        writer.writerow(["id", "smiles"])
        for name, text in iter_xyz(args.source):
            writer.writerow([os.path.splitext(name)[0], smiles_from_xyz(name, text, args.column)])
            count += 1
    print(f"wrote {count} rows to {args.output}", file=sys.stderr)


if __name__ == "__main__":
    main()
