"""
Karp-Sipser peeling
===================

Leaf removal takes out a leaf together with its neighbour and lowers the
rank by exactly two.  On trees nothing is left, so the rank is twice the
matching number whatever the field or the weights.
"""

# %%
import numpy as np

from cmrank.degrees import parse_distribution
from cmrank.ffield import FieldSpec
from cmrank.graphs import (WeightModel, core_matrix, karp_sipser_peel, matching_number_oracle,
                           random_tree, sample_configuration, sample_degree_sequence,
                           weighted_adjacency)

rng = np.random.default_rng(2)

# %%
t = random_tree(150, rng)
nu = matching_number_oracle(t)
for F in (FieldSpec.gf(2), FieldSpec.gf(7), FieldSpec.rationals()):
    r = weighted_adjacency(t, WeightModel("iid"), F, rng).rank()
    print(f"tree on 150 vertices over {F}: rank {r}, 2*nu = {2 * nu}")

# %% [markdown]
# On random graphs the core can be empty, small or the whole graph.  Its rank
# is all that remains to compute after peeling.

# %%
n = 20_000
for spec in ("list:0.5@1,0.5@3", "poisson:3", "delta:3"):
    g = sample_configuration(sample_degree_sequence(parse_distribution(spec), n, rng), rng)
    rep = karp_sipser_peel(g)
    A = weighted_adjacency(g, WeightModel("ones"), FieldSpec.gf(2))
    core_rank = core_matrix(A, rep).rank()
    print(f"{spec:18s} pairs {rep.removed_pairs:6d}  isolated {rep.isolated_removed:5d}  "
          f"core {len(rep.core_vertices):6d}  rank {A.rank()} = {rep.rank_contribution} + {core_rank}")
