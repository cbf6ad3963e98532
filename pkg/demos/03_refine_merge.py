"""
Refining anchors by merging discarded tokens
============================================

Every discarded token is matched to its most similar scan anchor. Only the
``M = floor(kappa * |S|)`` best-matched ones are merged, each pulling its
anchor toward itself in proportion to its priority. The running update gives
the same result as a one-shot weighted mean.
"""

import numpy as np

from fsrprune import assign_nearest_anchor, select_top_m, weighted_merge

rng = np.random.default_rng(2)
tokens = np.vstack([
    [1.0, 0.0], [0.0, 1.0],                              # the two scan anchors
    [1.0, 0.0] + 0.1 * rng.standard_normal((4, 2)),      # near anchor 0
    [0.0, 1.0] + 0.1 * rng.standard_normal((4, 2)),      # near anchor 1
])
phi = rng.random(len(tokens))
scan, discarded = [0, 1], list(range(2, 10))

assignments = assign_nearest_anchor(discarded, scan, tokens)
print("nearest anchor  ", dict(zip(assignments.discarded_index.tolist(), assignments.anchor_index.tolist())))
for kappa in (0.0, 1.0, 2.0, 4.0):
    d_top = select_top_m(assignments, kappa, len(scan))
    out = weighted_merge(scan, d_top, assignments, phi, tokens)
    print(f"kappa={kappa}: merged {d_top.tolist()} -> anchors {np.round(out.vectors, 3).tolist()}, "
          f"weights {np.round(out.weights, 3).tolist()}")

d_top = select_top_m(assignments, 4.0, len(scan))
out = weighted_merge(scan, d_top, assignments, phi, tokens)
group = [0] + out.member_lists[0]
closed = (phi[group, None] * tokens[group]).sum(0) / phi[group].sum()
print("closed-form mean for anchor 0:", np.round(closed, 6), " running:", np.round(out.vectors[0], 6))
