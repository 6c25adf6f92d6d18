"""
Frozen variables and the five types
===================================

Zeroing row and column i lowers the rank by 0, 1 or 2 according to how i is
frozen in A and in its transpose.
"""

# %%
import numpy as np

from cmrank.ffield import FieldSpec
from cmrank.sparse import SparseMatrix, attach_perturbation, classify_all, frozen_status, rank_drop

F = FieldSpec.gf(3)
A = SparseMatrix.from_dense([[0, 1, 0, 0],
                             [1, 0, 1, 0],
                             [0, 1, 0, 2],
                             [0, 0, 2, 0]], F, symmetric=True)
for i, t in enumerate(classify_all(A)):
    print(i, frozen_status(A, i).value, t.name, "drop", rank_drop(A, i))

# %% [markdown]
# Non-symmetric blocks realise all five types: a lone diagonal entry (X),
# an empty row and column (Z), a swap (Y) and a single off-diagonal entry (U, V).
# Bordering with a perturbation changes the rank by at most 2P.

# %%
rng = np.random.default_rng(5)
B = SparseMatrix.from_entries(6, 6, F, [(0, 0, 1), (2, 3, 1), (3, 2, 1), (4, 5, 1)])
print([t.name for t in classify_all(B)])
print("drops", [rank_drop(B, i) for i in range(6)])
Bp, pert = attach_perturbation(B, 2, rng)
print("rank before", B.rank(), "after bordering", Bp.rank(), "theta", pert.theta_r, pert.theta_c)
