"""Independent oracle for the shipped fixtures.

Recomputes the threshold model's predicted graph with numpy and the SHD
against the toy dataset's true graph. Prints one JSON object mapping each
threshold given on the command line to its SHD.

    python3 shd_oracle.py <toy-scm dir> <threshold> [<threshold> ...]
"""
import json
import sys
from pathlib import Path

import numpy as np


def main():
    root = Path(sys.argv[1])
    data = np.genfromtxt(root / "observations.csv", delimiter=",", names=True)
    x = np.column_stack([data[n] for n in data.dtype.names])
    truth = np.loadtxt(root / "true_graph.csv", delimiter=",", skiprows=1, dtype=int)
    c = np.abs(np.corrcoef(x, rowvar=False))
    out = {}
    for arg in sys.argv[2:]:
        t = float(arg)
        pred = np.triu(c > t, k=1).astype(int)
        off = ~np.eye(len(truth), dtype=bool)
        out[arg] = float(np.sum((pred != truth) & off))
    print(json.dumps(out, sort_keys=True))


if __name__ == "__main__":
    main()
