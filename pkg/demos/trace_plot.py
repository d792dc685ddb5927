"""
Plotting a flow trajectory
==========================

Writes the trajectory of five points in the plane as CSV and SVG, exactly as
``subsetflow trace`` does.
"""

import json
import sys
import tempfile
from pathlib import Path

import numpy as np

from subsetflow.cli import main

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp())
pts = np.random.default_rng(3).uniform(-1, 1, (5, 2))
src = out / "points.json"
src.write_text(json.dumps({"points": pts.tolist()}))

code = main(["trace", str(src), "-o", str(out / "trace.csv"), "--svg", str(out / "trace.svg")])
print("exit", code, "->", out / "trace.svg")
