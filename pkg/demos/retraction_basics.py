"""
Retracting a point set onto fewer points
========================================

Each point moves toward the others with unit pull from every partner, until
the two closest points meet.  The merged set has one point fewer.
"""

import numpy as np

from subsetflow import FiniteSubset, hausdorff_distance, integrate_to_collision, retract_chain, retract_once

# two points meet at their midpoint, after time half their distance
pair = FiniteSubset([[0.0], [1.0]])
res = retract_once(pair)
print("pair ->", res.output.tolist(), "T ~", res.T_estimate)

# three collinear points: the middle one feels no net pull, the ends close in
line = FiniteSubset([[0.0], [1.0], [2.0]])
print("line ->", retract_once(line).output.tolist())

# the equilateral triangle collapses onto its centroid at t = 1/3
tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
trace = integrate_to_collision(tri)
print("triangle: T ~ %.12f, bracket %s" % (trace.T_estimate, trace.T_bracket))

# a random cloud in R^3, retracted down to two points one stage at a time
rng = np.random.default_rng(0)
cloud = FiniteSubset(rng.uniform(-1, 1, (6, 3)))
two = retract_chain(cloud, 2)
print("cloud of 6 -> 2 points, moved by", hausdorff_distance(cloud.points, two.points))

# retracting something already small enough changes nothing
assert retract_once(two, n=3).output is two
