"""Flat ``key = value`` experiment configuration.

Lines starting with ``#`` are comments.  Lists are comma separated; a
snapshot grid may also be written ``start:stop:step`` (stop inclusive).

Recognised keys::

    name          experiment id                       (default "experiment")
    degree        distribution spec, see cmrank.degrees (required)
    degree_mode   iid | quantile                       (default iid)
    n             list of sizes                         (required)
    replicates    replicate count                       (default 1)
    fields        list of gf:p / q                      (default gf:2)
    weights       list of ones | iid | checkerboard     (default ones)
    perturbation  P, 0 disables bordering               (default 0)
    snapshots     exploration s grid                    (default 0:0.75:0.05)
    eps           exploration window margin             (default 0.05)
    type_s        stages for type proportions (explore)  (default none)
    cond_s        stage for the conditional degree law   (default none)
    seed          master seed                           (default 0)
    out           output path prefix                    (default ./<name>)
    threads       worker processes                      (default 1)
    tol.<name>    tolerance overrides, e.g. tol.rank = 0.02
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..degrees import DegreeDistribution, parse_distribution
from ..ffield import FieldSpec
from ..graphs import WeightModel

DEFAULT_TOL = {
    "rank": 0.02,
    "profile": 0.02,
    "living": 0.03,
    "residual": 0.05,
    "tv": 0.03,
}


@dataclass(frozen=True)
class ExperimentConfig:
    degree: str
    n: tuple[int, ...]
    name: str = "experiment"
    degree_mode: str = "iid"
    replicates: int = 1
    fields: tuple[str, ...] = ("gf:2",)
    weights: tuple[str, ...] = ("ones",)
    perturbation: int = 0
    snapshots: tuple[float, ...] = tuple(np.round(np.arange(0, 0.7501, 0.05), 10))
    eps: float = 0.05
    type_s: tuple[float, ...] = ()
    cond_s: float | None = None
    seed: int = 0
    out: str = ""
    threads: int = 1
    tol: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOL))

    def __post_init__(self) -> None:
        if not self.n or any(k < 1 for k in self.n):
            raise ValueError("every n must be >= 1")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.perturbation < 0:
            raise ValueError("perturbation must be >= 0")
        if self.degree_mode not in ("iid", "quantile"):
            raise ValueError("degree_mode must be iid or quantile")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        for f in self.fields:
            FieldSpec.parse(f)
        for w in self.weights:
            WeightModel(w)
        parse_distribution(self.degree)

    @property
    def distribution(self) -> DegreeDistribution:
        return parse_distribution(self.degree)

    @property
    def field_specs(self) -> list[FieldSpec]:
        return [FieldSpec.parse(f) for f in self.fields]

    @property
    def out_prefix(self) -> Path:
        return Path(self.out or self.name)

    def with_overrides(self, **kw) -> ExperimentConfig:
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["n"], d["fields"], d["weights"] = list(self.n), list(self.fields), list(self.weights)
        d["snapshots"], d["type_s"] = list(self.snapshots), list(self.type_s)
        return d


def _floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text or text.lower() == "none":
        return ()
    if ":" in text and "," not in text:
        a, b, c = (float(x) for x in text.split(":"))
        return tuple(float(x) for x in np.round(np.arange(a, b + c / 2, c), 10))
    return tuple(float(x) for x in text.split(","))


def _list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",), delimiters=("=",))
    cp.optionxform = str
    cp.read_string("[experiment]\n" + text)
    raw = dict(cp["experiment"])
    kw: dict = {}
    tol = dict(DEFAULT_TOL)
    for key, val in raw.items():
        val = val.strip()
        if key.startswith("tol."):
            tol[key[4:]] = float(val)
        elif key == "n":
            kw["n"] = tuple(int(float(x)) for x in _list(val))
        elif key in ("replicates", "perturbation", "seed", "threads"):
            kw[key] = int(val)
        elif key in ("fields", "weights"):
            kw[key] = _list(val)
        elif key in ("snapshots", "type_s"):
            kw[key] = _floats(val)
        elif key == "cond_s":
            kw[key] = None if val.lower() == "none" else float(val)
        elif key == "eps":
            kw[key] = float(val)
        elif key in ("name", "degree", "degree_mode", "out"):
            kw[key] = val
        else:
            raise ValueError(f"unknown config key {key!r}")
    if "degree" not in kw or "n" not in kw:
        raise ValueError("config needs 'degree' and 'n'")
    kw["tol"] = tol
    return ExperimentConfig(**kw)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())
