#!/usr/bin/env python3
"""Plot qkdrate CSV output: secret/verified key ratio versus distance.

Documentation example only; the toolchain itself never plots. Works on both
`keyrate` output (single `ratio` column) and `compare` output (one
`ratio_<mode>` column per mode).

    ./build/tools/qkdrate compare --config configs/synthetic.conf \
        --modes poissonian,gaussian-mixed,vacuum-nu2,wang:1.0 \
        --from-km 0 --to-km 160 --step-km 5 --out compare.csv
    python3 scripts/plot_keyrate.py compare.csv compare.png
"""

import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main() -> int:
    if len(sys.argv) < 2:
        print(__doc__)
        return 2
    csv_path = sys.argv[1]
    out_path = sys.argv[2] if len(sys.argv) > 2 else "keyrate.png"

    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        print("no data rows in", csv_path)
        return 3

    distance = [float(r["distance_km"]) for r in rows]
    ratio_cols = [c for c in rows[0] if c == "ratio" or c.startswith("ratio_")]

    fig, ax = plt.subplots(figsize=(6, 4))
    for col in ratio_cols:
        values = [float(r[col]) for r in rows]
        label = col.removeprefix("ratio_") if col != "ratio" else "ratio"
        ax.plot(distance, values, label=label)
    ax.set_xlabel("distance [km]")
    ax.set_ylabel("secret / verified key ratio")
    ax.set_yscale("log")
    ax.set_ylim(bottom=1e-3)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    print("wrote", out_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
