"""
No 1-Lipschitz retraction from triples onto pairs in the plane
==============================================================

Take the unit equilateral triangle A.  For each side, slide it one unit along
its own line in either direction to get two pairs at distance 1 from A and 2
from each other.  A 1-Lipschitz retraction fixes both pairs, so it must send A
to a pair within distance 1 of each.  A grid
search shows the admissible images shrink to the side itself, and the three
sides cannot all be the image.
"""

from subsetflow.verify import TRIANGLE, check_counterexample

r = check_counterexample(grid_step=0.01)
print("triangle:", TRIANGLE.tolist())
for side, image in enumerate(r.witness["forced_images"]):
    print(f"side {side}: forced image ~ {image}")
print("radius of admissible images:", r.observed)
print("closest two forced images are", r.witness["min_gap_between_images"], "apart")
