"""
The exploration process
=======================

Vertices are woken one at a time by pairing half-edges.  The sleeping degree
profile, the current degree profile and the number of living half-edges
follow deterministic curves in s, the fraction of awakened vertices.
"""

# %%
import math

import numpy as np

from cmrank import theory as T
from cmrank.degrees import DegreeDistribution
from cmrank.exploration import explore, current_degree_profile, sleeping_degree_profile
from cmrank.graphs import sample_degree_sequence

dist = DegreeDistribution.from_dict({1: 0.5, 3: 0.5})
psi = T.Pgf.of(dist)
rng = np.random.default_rng(3)
n = 50_000
grid = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7]
state, traj = explore(sample_degree_sequence(dist, n, rng), rng, grid)
print("giant component exhausted at s =", round(T.giant_fraction(psi), 5))

# %%
print(" s     V1/n  pred   V3/n  pred   L/n   pred")
for s in grid:
    t = T.t_of_s(psi, s)
    V = sleeping_degree_profile(traj, s)
    L = traj.get(s).L / n
    print(f"{s:.1f}  {V.get(1, 0):.4f} {math.exp(-t) / 2:.4f}  {V.get(3, 0):.4f} {math.exp(-3 * t) / 2:.4f}  "
          f"{L:.4f} {2 * math.exp(-2 * t):.4f}")

# %% [markdown]
# Current degrees inside the sleeping graph are a binomial thinning of the
# original ones.

# %%
for s in (0.1, 0.3, 0.5):
    emp = current_degree_profile(traj, s)
    law = T.current_degree_law(psi, T.t_of_s(psi, s))
    print(s, [f"{emp.get(k, 0):.4f}/{law[k]:.4f}" for k in range(4)])

# %% [markdown]
# The degree of the next awakened vertex inside the sleeping graph follows q(s).

# %%
samples = []
for _ in range(300):
    st, _ = explore(sample_degree_sequence(dist, 5000, rng), rng)
    samples.append(st.conditional_degree(int(0.3 * 5000)))
print("empirical", np.bincount(samples, minlength=3) / len(samples))
print("predicted", T.q_law(psi, 0.3))
