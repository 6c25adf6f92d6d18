"""Degree distributions and the textual grammar used by configs and the CLI.

Grammar (tokens separated by ``;`` or whitespace)::

    delta:3                 all mass on degree 3
    list:0.5@1,0.5@3        probability@degree pairs
    poisson:3.0             Poisson, truncated at tail mass 1e-12
    er:lambda=3             alias of poisson:3
    ... truncate:K          optional: drop degrees above K and renormalize
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

TAIL_MASS = 1e-12


@dataclass(frozen=True)
class DegreeDistribution:
    """Finite-support degree law; ``probs[k]`` is the probability of degree k."""

    probs: np.ndarray
    label: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probabilities must be a non-empty vector")
        if (p < 0).any():
            raise ValueError("negative probability")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        if p[0] >= 1.0:
            raise ValueError("p_0 must be < 1")
        nz = np.nonzero(p)[0]
        p = p[: nz[-1] + 1].copy()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_dict(cls, probs: dict[int, float], label: str = "") -> DegreeDistribution:
        kmax = max(probs)
        arr = np.zeros(kmax + 1)
        for k, v in probs.items():
            if k < 0:
                raise ValueError("negative degree")
            arr[k] += v
        return cls(arr, label)

    @property
    def max_degree(self) -> int:
        return self.probs.size - 1

    @property
    def mean(self) -> float:
        return float(np.arange(self.probs.size) @ self.probs)

    def as_dict(self) -> dict[int, float]:
        return {k: float(v) for k, v in enumerate(self.probs) if v > 0}

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)

    def truncate(self, K: int) -> DegreeDistribution:
        p = np.array(self.probs[: K + 1])
        if p.sum() <= 0:
            raise ValueError("truncation removes all mass")
        return DegreeDistribution(p / p.sum(), self.label)

    def __str__(self) -> str:
        return self.label or "list:" + ",".join(f"{v!r}@{k}" for k, v in self.as_dict().items())


def poisson(lam: float, tail: float = TAIL_MASS) -> DegreeDistribution:
    if lam <= 0:
        raise ValueError("Poisson mean must be positive")
    K = int(stats.poisson.isf(tail, lam))
    while stats.poisson.sf(K, lam) >= tail:
        K += 1
    p = stats.poisson.pmf(np.arange(K + 1), lam)
    return DegreeDistribution(p / p.sum(), f"poisson:{lam:g}")


def parse_distribution(text: str) -> DegreeDistribution:
    tokens = text.replace(";", " ").split()
    if not tokens:
        raise ValueError("empty distribution spec")
    truncate = None
    rest = []
    for tok in tokens:
        if tok.startswith("truncate:"):
            truncate = _int(tok[9:], text)
        else:
            rest.append(tok)
    if len(rest) != 1:
        raise ValueError(f"cannot parse distribution {text!r}")
    kind, _, arg = rest[0].partition(":")
    kind = kind.lower()
    if kind == "delta":
        k = _int(arg, text)
        dist = DegreeDistribution.from_dict({k: 1.0}, f"delta:{k}")
    elif kind == "list":
        probs: dict[int, float] = {}
        for item in arg.split(","):
            pr, sep, k = item.partition("@")
            if not sep:
                raise ValueError(f"list item {item!r} is not prob@degree")
            probs[_int(k, text)] = probs.get(_int(k, text), 0.0) + _float(pr, text)
        dist = DegreeDistribution.from_dict(probs, rest[0])
    elif kind in ("poisson", "er"):
        if kind == "er":
            key, sep, val = arg.partition("=")
            if not sep or key.strip().lower() not in ("lambda", "lam"):
                raise ValueError(f"expected er:lambda=<value> in {text!r}")
            arg = val
        dist = poisson(_float(arg, text))
    else:
        raise ValueError(f"unknown distribution kind {kind!r}")
    if truncate is not None:
        dist = dist.truncate(truncate)
    return dist


def _int(s: str, ctx: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise ValueError(f"expected an integer in {ctx!r}, got {s!r}") from None


def _float(s: str, ctx: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise ValueError(f"expected a number in {ctx!r}, got {s!r}") from None
