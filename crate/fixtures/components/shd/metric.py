"""Structural Hamming distance between two adjacency CSVs."""
import csv
import json
import sys


def load(path):
    with open(path, newline="") as f:
        rows = [[c.strip() for c in r] for r in csv.reader(f) if r]
    names, body = rows[0], rows[1:]
    matrix = [[int(c) for c in r] for r in body]
    if len(matrix) != len(names) or any(len(r) != len(names) for r in matrix):
        sys.exit(f"{path}: matrix is not {len(names)}x{len(names)}")
    return names, matrix


def main():
    with open("inputs.json") as f:
        inputs = json.load(f)["inputs"]
    names_t, truth = load(inputs["true_graph"])
    names_p, pred = load(inputs["predicted_graph"])
    if names_t != names_p:
        sys.exit(f"variable names differ: {names_t} vs {names_p}")
    n = len(truth)
    value = sum(1 for i in range(n) for j in range(n) if i != j and truth[i][j] != pred[i][j])
    with open("result.json", "w") as f:
        json.dump({"value": float(value)}, f)


if __name__ == "__main__":
    main()
