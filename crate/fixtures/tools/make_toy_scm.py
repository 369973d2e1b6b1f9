"""Regenerates components/toy-scm from a fixed seed.

x1 -> x2 -> x3 and x1 -> x4, linear with Gaussian noise.
"""
import csv
import random
from pathlib import Path

N = 200
SEED = 20240601
NAMES = ["x1", "x2", "x3", "x4"]
EDGES = [("x1", "x2"), ("x2", "x3"), ("x1", "x4")]


def main():
    rng = random.Random(SEED)
    out = Path(__file__).resolve().parent.parent / "components" / "toy-scm"
    rows = []
    for _ in range(N):
        x1 = rng.gauss(0, 1)
        x2 = 0.9 * x1 + rng.gauss(0, 0.5)
        x3 = -0.8 * x2 + rng.gauss(0, 0.6)
        x4 = 0.7 * x1 + rng.gauss(0, 0.8)
        rows.append([f"{v:.6f}" for v in (x1, x2, x3, x4)])
    with open(out / "observations.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(NAMES)
        w.writerows(rows)
    with open(out / "true_graph.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(NAMES)
        for a in NAMES:
            w.writerow([1 if (a, b) in EDGES else 0 for b in NAMES])


if __name__ == "__main__":
    main()
