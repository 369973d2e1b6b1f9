"""Correlation-threshold causal discovery.

Reads the observations CSV named in inputs.json, adds an edge i -> j for
every column pair i < j whose absolute Pearson correlation exceeds
params["threshold"] (default 0.5), and writes the adjacency matrix to
outputs/predicted_graph.csv.
"""
import csv
import json
import math
import os


def load(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    names = rows[0]
    cols = [[float(r[k]) for r in rows[1:]] for k in range(len(names))]
    return names, cols


def corr(a, b):
    n = len(a)
    ma, mb = sum(a) / n, sum(b) / n
    sab = sum((x - ma) * (y - mb) for x, y in zip(a, b))
    saa = sum((x - ma) ** 2 for x in a)
    sbb = sum((y - mb) ** 2 for y in b)
    return sab / math.sqrt(saa * sbb)


def main():
    with open("inputs.json") as f:
        inputs = json.load(f)
    with open("params.json") as f:
        params = json.load(f)
    threshold = float(params.get("threshold", 0.5))
    names, cols = load(inputs["inputs"]["observations"])
    n = len(names)
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if abs(corr(cols[i], cols[j])) > threshold:
                adj[i][j] = 1
    out = os.path.join(inputs["output_dir"], "predicted_graph.csv")
    with open(out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(names)
        w.writerows(adj)
    print(f"threshold={threshold} edges={sum(map(sum, adj))}")


if __name__ == "__main__":
    main()
