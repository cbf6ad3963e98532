"""
Priority scores and the focus set
=================================

Each token gets a saliency score (mean [CLS] attention over heads) and a
relevance score (cosine similarity to the query). Both are min-max
normalized and multiplied as ``r_hat**alpha * s_hat**beta``. The focus set is
the shortest prefix of the sorted priorities that holds ``rho`` of the total.
"""

import numpy as np

from fsrprune import AttentionInput, PruneConfig, select_focus
from fsrprune.focus import focus_budget_uncapped

rng = np.random.default_rng(0)
tokens = rng.standard_normal((16, 8))
query = tokens[3] + 0.1 * rng.standard_normal(8)     # token 3 matches the query
cls_rows = rng.dirichlet(np.ones(16), size=4)
cls_rows[:, 3] += 0.3                                 # and is also salient
attn = AttentionInput.from_cls_rows(cls_rows)

res = select_focus(tokens, attn, query, PruneConfig(budget_K=8))
print("phi          ", np.round(res.phi, 3))
print("priority order", res.permutation)
print("K_F =", res.k_f, " focus set =", res.focus_set)

# Raising rho asks for more of the mass, so the focus set can only grow.
for rho in (0.5, 0.7, 0.9, 0.99):
    print(f"rho={rho:<5} K_F (before the budget cap) = {focus_budget_uncapped(res.phi, rho)}")

# Dropping the relevance pathway: saliency only, as used for query-free encoders.
res = select_focus(tokens, attn, None, PruneConfig(budget_K=8, relevance_mode="none"))
print("saliency-only focus set:", res.focus_set)
