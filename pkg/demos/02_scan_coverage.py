"""
Scanning for context and the covering radius
=============================================

The scan stage grows the anchor set from the focus tokens by repeatedly
adding the token farthest (in cosine distance) from every anchor chosen so
far. The covering radius is the largest distance from any token to its
nearest kept token, and for small inputs it can be compared against the
exhaustive optimum.
"""

import math

import numpy as np

from fsrprune import conditional_context_sampling, coverage_radius, optimal_covering_radius

rng = np.random.default_rng(1)
tokens = rng.standard_normal((11, 3))
focus = [0, 1]

scan = conditional_context_sampling(tokens, focus, 3)
print("scan order  ", scan.selection_order)
print("gains       ", np.round(scan.gain_sequence, 4), "(never increase)")
greedy = coverage_radius(tokens, focus + scan.scan_set.tolist())
best = optimal_covering_radius(tokens, focus, 3)
print(f"greedy radius {greedy:.4f}  optimum {best:.4f}  ratio {greedy / best:.3f}")

# 1 - cos does not satisfy the triangle inequality, so the classical factor of two
# can fail. Four points on the unit circle show it:
ang = np.radians([0, 150, 160, 170])
circle = np.c_[np.cos(ang), np.sin(ang)]
pick = conditional_context_sampling(circle, [0], 1).scan_set.tolist()
greedy = coverage_radius(circle, [0] + pick)
best = optimal_covering_radius(circle, [0], 1)
print(f"\ncircle: greedy picks {np.degrees(ang[pick])} deg, radius {greedy:.5f}, optimum {best:.5f}, "
      f"ratio {greedy / best:.2f}")
# The greedy rule is the same under the angle, which is a metric; there it is within 2x.
print(f"in angle: {math.degrees(math.acos(1 - greedy)):.1f} deg vs optimum "
      f"{math.degrees(math.acos(1 - best)):.1f} deg")
