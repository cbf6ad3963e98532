"""
Comparing against attention-only and diversity-only selection
=============================================================

Top-k attention keeps the most attended tokens and tends to miss whole
clusters. Plain farthest-point sampling covers every cluster but ignores
priority. The full pipeline keeps most of the priority mass and still
reaches every cluster.
"""

from fsrprune.synthbench import format_table, quality_trials, summarize

rows = quality_trials(range(50), n_clusters=3, tokens_per_cluster=32, d=16, budget_fraction=0.25)
print(format_table(summarize(rows)))
