"""Generate the bundled census-style table (src/propclust/data/census_sample.csv).

The columns mimic the numeric attributes of the UCI Adult data plus ``sex``
and the ``fnlwgt`` sampling weight. Values are synthetic and seeded, so the
file is reproducible byte for byte.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "propclust" / "data" / "census_sample.csv"


def generate(n: int, seed: int):
    rng = np.random.default_rng(seed)
    age = np.clip(rng.gamma(6.0, 6.5, n) + 17, 17, 90).round()
    edu = np.clip(rng.normal(10, 2.6, n), 1, 16).round()
    hours = np.clip(rng.normal(40, 12, n), 1, 99).round()
    gain = np.where(rng.random(n) < 0.08, rng.lognormal(8.5, 1.0, n), 0.0).round()
    loss = np.where(rng.random(n) < 0.05, rng.lognormal(7.4, 0.3, n), 0.0).round()
    sex = np.where(rng.random(n) < 0.67, "Male", "Female")
    fnlwgt = rng.lognormal(12.0, 0.55, n).round()
    header = ["age", "education-num", "capital-gain", "capital-loss", "hours-per-week", "sex", "fnlwgt"]
    rows = zip(age, edu, gain, loss, hours, sex, fnlwgt)
    return header, [[int(a), int(e), int(g), int(lo), int(h), s, int(w)] for a, e, g, lo, h, s, w in rows]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=400)
    ap.add_argument("--seed", type=int, default=20240501)
    ap.add_argument("--output", type=Path, default=OUT)
    args = ap.parse_args()
    header, rows = generate(args.rows, args.seed)
    with open(args.output, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {len(rows)} rows to {args.output}")


if __name__ == "__main__":
    main()
