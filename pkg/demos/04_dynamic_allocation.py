"""
How the focus/scan split follows the scene
==========================================

At a fixed budget, the focus set grows when attention is spread over more
salient regions and shrinks when attention concentrates on one. The rest of
the budget goes to the scan stage.
"""

from fsrprune import PruneConfig, prune
from fsrprune.synthbench import generate_scene

K = 32
for n_salient in (1, 2, 3):
    for temperature in (0.1, 0.03):
        splits = []
        for seed in range(20):
            scene = generate_scene(6, 24, 16, n_salient / 6, 0.3, seed, temperature=temperature)
            res = prune(scene.tokens, scene.attn, scene.query, PruneConfig(budget_K=K))
            splits.append((res.stats.k_f, res.stats.k_s))
        mean_f = sum(f for f, _ in splits) / len(splits)
        print(f"salient clusters {n_salient}, temperature {temperature:<5}: "
              f"mean focus {mean_f:5.1f}  scan {K - mean_f:5.1f}")
