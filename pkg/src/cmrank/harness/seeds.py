"""Deterministic per-task seeds.

A task seed is obtained by folding its integer keys into the master seed with
the splitmix64 finaliser: ``x <- splitmix64(x ^ splitmix64(key + 1))`` for each
key in order.  Graph streams use the key (n, replicate); weight and
perturbation streams add the field index, so changing the list of fields
never changes the sampled graphs.
"""
from __future__ import annotations

import numpy as np

MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def derive_seed(master: int, *keys: int) -> int:
    x = int(master) & MASK
    for k in keys:
        x = splitmix64(x ^ splitmix64((int(k) + 1) & MASK))
    return x


def rng_for(master: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, *keys))
