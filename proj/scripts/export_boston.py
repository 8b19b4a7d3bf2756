"""Write data/boston_housing.csv from the copy bundled in scikit-learn < 1.2.

Usage: python scripts/export_boston.py SOURCE.csv
where SOURCE.csv is sklearn/datasets/data/boston_house_prices.csv (from an
installed package or an unpacked wheel). Column names are lowercased to match
the R mlbench naming.
"""
import csv
import sys


def main() -> None:
    src = sys.argv[1]
    out = sys.argv[2] if len(sys.argv) > 2 else "data/boston_housing.csv"
    with open(src, newline="") as f:
        rows = list(csv.reader(f))
    header = [h.lower() for h in rows[1]]
    body = rows[2:]
    assert len(body) == 506 and len(header) == 14
    with open(out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(body)


if __name__ == "__main__":
    main()
