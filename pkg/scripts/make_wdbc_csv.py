"""Write the 569-row Wisconsin Diagnostic Breast Cancer table to data/wdbc.csv.

Columns follow the common UCI/Kaggle naming (id, diagnosis, radius_mean, ...,
fractal_dimension_worst); diagnosis is M or B. Needs scikit-learn, which ships
a copy of the data.
"""

import argparse
import csv
from pathlib import Path

from sklearn.datasets import load_breast_cancer


def column_name(sk_name: str) -> str:
    words = sk_name.replace("error", "se").split()
    if words[0] in ("mean", "worst"):
        block, base = words[0], words[1:]
    else:
        block, base = words[-1], words[:-1]
    return "_".join(base + [block])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "wdbc.csv"))
    args = ap.parse_args()
    ds = load_breast_cancer()
    names = [column_name(n) for n in ds.feature_names]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "diagnosis"] + names)
        for i, (row, t) in enumerate(zip(ds.data, ds.target)):
            # sklearn codes malignant as 0
            w.writerow([i + 1, "M" if t == 0 else "B"] + [repr(float(v)) for v in row])
    print(f"wrote {len(ds.data)} rows to {out}")


if __name__ == "__main__":
    main()
