"""Closed-form sanity checks of the resistance functional.

The bare disc has resistance pi; a single point above the disc's center
produces a cone with resistance pi/(1+M^2); many rim points approximate a
frustum whose resistance is known exactly.  All three are reproduced by
the exact evaluator to (near) machine precision.
"""

import numpy as np

from minresist import evaluate

print("flat disc:")
print(f"  evaluate({{}})        = {evaluate(np.zeros((0, 3))):.15f}")
print(f"  pi                  = {np.pi:.15f}")

print("\ncentered cones:")
for M in (0.5, 0.7, 1.0, 1.5):
    val = evaluate([[0.0, 0.0, M]])
    print(f"  M={M}: evaluate = {val:.15f}   pi/(1+M^2) = "
          f"{np.pi / (1 + M * M):.15f}")

print("\nfrustum limit (rim ring at r=0.5, z=1):")
exact = np.pi / 4 + (3 * np.pi / 4) / 5
for n in (16, 64, 256, 1024):
    ang = 2 * np.pi * np.arange(n) / n
    pts = np.column_stack([0.5 * np.cos(ang), 0.5 * np.sin(ang), np.ones(n)])
    print(f"  n={n:5d}: {evaluate(pts):.10f}   (exact limit {exact:.10f})")
