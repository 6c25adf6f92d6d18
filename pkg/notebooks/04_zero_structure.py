"""
Zeros of G_t and the rank functional
====================================

The minimiser of R sits at a zero of G.  Depending on kappa, G has three
zeros early in the exploration and one later, or one throughout.
"""

# %%
import numpy as np

from cmrank import theory as T

laws = {
    "half 1, half 3": T.Pgf.of({1: 0.5, 3: 0.5}),
    "4-point": T.Pgf.of({1: 0.3, 2: 0.1, 3: 0.3, 4: 0.3}),
    "3-regular": T.Pgf.of({3: 1}),
}

# %%
for name, psi in laws.items():
    k = T.kappa(psi.size_biased())
    print(f"{name}: kappa = {k:+.5f}, log-concave psi'': {T.log_concavity_check(psi)}")
    for t in (0.0, max(k, 0) / 2, max(k, 0) * 2 + 0.05):
        _, h = T.deformed_pgfs(psi, t)
        z = T.G_zeros(h)
        print(f"   t = {t:.4f}: zeros {np.round(z.zeros, 5)}  G'(alpha_0) = {T.G_prime(h, z.alpha_0):+.2e}")

# %% [markdown]
# Integrating h along the exploration reproduces the drop of sigma * R.

# %%
for name, psi in laws.items():
    if T.fixed_point_xi(psi) == 0:
        S = 0.8
    else:
        S = T.window_end(psi)
    r = T.integral_identity_check(psi, S)
    print(f"{name}: S = {S:.3f}  integral {r.lhs:.10f}  difference of R terms {r.rhs:.10f}")
